//! The two shipped equation sets.
//!
//! Both are written in a frame rotating at the mean cavity energy `ω̄`, so
//! the carrier enters only through the constant phase `e^{iω̄τ/ħ}` and each
//! cavity keeps its detuning `δ_μ = ω_μ − ω̄`. With
//! `a_A = 2 V*_BA e^{iω̄τ/ħ}` and `a_B = 2 V*_AB e^{iω̄τ/ħ}`, the cavity
//! amplitudes obey
//! `∂_t N_A = −(γ_A + iδ_A) N_A − a_A N_B(t − τ)` (rates divided by `ħ`).
//!
//! # Single excitation
//!
//! System variables `p_a = ⟨A|ρ_s|A⟩`, `p_b`, `c_ab = ⟨A|ρ_s|B⟩`;
//! `⟨B|ρ_s|A⟩` is always read as `conj(c_ab)`. Band variable `x_νμ` is
//! `⟨0|ρ^(1)L_{0ν}(t, t₁)|μ⟩` with source `⟨ν|ρ_s(t₁)|μ⟩`; its right-acting
//! partner `⟨μ|ρ^(1)R_{ν0}|0⟩` is `conj(x_νμ)`.
//!
//! # Two-photon coherences
//!
//! System variables `c20 = ⟨20|ρ_s|00⟩`, `c02`, `c11`. A band variable
//! `q<state>_<transition>` is `⟨state|ρ^(1)L_{transition}(t, t₁)|00⟩`, e.g.
//! `q10_0b1b` for the transition of cavity B from one photon to none with a
//! photon left in A.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EquationSet, Reference, TimePattern, Trajectory, ValidationError};
use crate::kernel::correlation_kernel;
use crate::oracle::WaveTrajectory;
use crate::qnm::{Cavity, CavityParams, QnmError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Params(#[from] QnmError),
    #[error("simulations need a positive delay, got {0} fs")]
    NoDelay(f64),
    #[error("generated equations are invalid: {0:?}")]
    Invalid(Vec<ValidationError>),
    #[error("time grids differ: {0}")]
    GridMismatch(String),
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cavity_name(c: Cavity) -> &'static str {
    c.label()
}

/// Transfer coefficient `a_μ = 2 V*_{μ̄μ} e^{iω̄τ/ħ}` in eV, read off the
/// forward part of the cross kernel.
pub fn transfer_coefficient(params: &CavityParams, mu: Cavity) -> Complex64 {
    let kernel = correlation_kernel(params, mu.other(), mu);
    kernel.forward_coupling_ev().conj() * params.carrier_phase()
}

/// `γ_μ + iδ_μ` in eV: the damping of an amplitude in cavity `μ`.
fn amplitude_rate(params: &CavityParams, mu: Cavity) -> Complex64 {
    Complex64::new(params.gamma(mu), params.detuning_ev(mu))
}

fn checked(params: &CavityParams) -> Result<(), ModelError> {
    params.validate()?;
    if params.tau_fs <= 0.0 {
        return Err(ModelError::NoDelay(params.tau_fs));
    }
    Ok(())
}

fn finish(eqs: EquationSet) -> Result<EquationSet, ModelError> {
    eqs.validate().map_err(ModelError::Invalid)?;
    Ok(eqs)
}

fn x_name(nu: Cavity, mu: Cavity) -> String {
    format!("x_{}{}", cavity_name(nu), cavity_name(mu))
}

fn y_name(nu: Cavity, mu: Cavity) -> String {
    format!("y_{}{}", cavity_name(nu), cavity_name(mu))
}

/// Variables of the single-excitation model.
pub const SINGLE_SYSTEM_VARS: [&str; 3] = ["p_a", "p_b", "c_ab"];

/// Initial state with the excitation in cavity A.
pub fn single_excitation_initial() -> Vec<(&'static str, Complex64)> {
    vec![("p_a", ONE)]
}

/// Single-excitation density-matrix equations with four stored band
/// variables; conjugate partners are read through conjugation.
pub fn build_single_excitation(params: &CavityParams) -> Result<EquationSet, ModelError> {
    checked(params)?;
    let (a, b) = (Cavity::A, Cavity::B);
    let mut eqs = EquationSet::new("single_excitation", params.tau_fs);
    for name in SINGLE_SYSTEM_VARS {
        eqs.system_var(name);
    }
    for nu in Cavity::BOTH {
        for mu in Cavity::BOTH {
            eqs.band_var(x_name(nu, mu));
        }
    }

    for (pop, mu) in [("p_a", a), ("p_b", b)] {
        let coeff = transfer_coefficient(params, mu);
        let x = x_name(mu.other(), mu);
        eqs.term(pop, -coeff.conj(), Reference::conj(&x, TimePattern::Diagonal))
            .term(pop, -coeff, Reference::new(&x, TimePattern::Diagonal))
            .term(
                pop,
                Complex64::new(-2.0 * params.gamma(mu), 0.0),
                Reference::new(pop, TimePattern::Current),
            );
    }
    let damping = -(amplitude_rate(params, a) + amplitude_rate(params, b).conj());
    eqs.term("c_ab", damping, Reference::new("c_ab", TimePattern::Current))
        .term(
            "c_ab",
            -transfer_coefficient(params, a),
            Reference::new(x_name(b, b), TimePattern::Diagonal),
        )
        .term(
            "c_ab",
            -transfer_coefficient(params, b).conj(),
            Reference::conj(x_name(a, a), TimePattern::Diagonal),
        );

    for nu in Cavity::BOTH {
        for mu in Cavity::BOTH {
            let x = x_name(nu, mu);
            let coeff = -transfer_coefficient(params, mu).conj();
            eqs.term(
                &x,
                -amplitude_rate(params, mu).conj(),
                Reference::new(&x, TimePattern::Own),
            )
            .term(
                &x,
                coeff,
                Reference::conj(x_name(mu.other(), nu), TimePattern::SecondArgDelayed),
            )
            .term(
                &x,
                coeff,
                Reference::new(x_name(nu, mu.other()), TimePattern::FirstArgDelayed),
            );
        }
    }
    eqs.source(x_name(a, a), ONE, "p_a", false)
        .source(x_name(b, b), ONE, "p_b", false)
        .source(x_name(a, b), ONE, "c_ab", false)
        .source(x_name(b, a), ONE, "c_ab", true);
    finish(eqs)
}

/// The same dynamics with every element stored explicitly: `c_ba` and the
/// right-acting band variables `y_νμ = ⟨μ|ρ^(1)R_{ν0}|0⟩` get their own
/// equations and nothing is read through conjugation.
pub fn build_single_excitation_full(params: &CavityParams) -> Result<EquationSet, ModelError> {
    checked(params)?;
    let (a, b) = (Cavity::A, Cavity::B);
    let mut eqs = EquationSet::new("single_excitation_full", params.tau_fs);
    for name in ["p_a", "p_b", "c_ab", "c_ba"] {
        eqs.system_var(name);
    }
    for nu in Cavity::BOTH {
        for mu in Cavity::BOTH {
            eqs.band_var(x_name(nu, mu));
            eqs.band_var(y_name(nu, mu));
        }
    }

    for (pop, mu) in [("p_a", a), ("p_b", b)] {
        let coeff = transfer_coefficient(params, mu);
        eqs.term(
            pop,
            Complex64::new(-2.0 * params.gamma(mu), 0.0),
            Reference::new(pop, TimePattern::Current),
        )
        .term(
            pop,
            -coeff,
            Reference::new(x_name(mu.other(), mu), TimePattern::Diagonal),
        )
        .term(
            pop,
            -coeff.conj(),
            Reference::new(y_name(mu.other(), mu), TimePattern::Diagonal),
        );
    }
    let damping = -(amplitude_rate(params, a) + amplitude_rate(params, b).conj());
    let (ta, tb) = (transfer_coefficient(params, a), transfer_coefficient(params, b));
    eqs.term("c_ab", damping, Reference::new("c_ab", TimePattern::Current))
        .term("c_ab", -ta, Reference::new(x_name(b, b), TimePattern::Diagonal))
        .term("c_ab", -tb.conj(), Reference::new(y_name(a, a), TimePattern::Diagonal))
        .term("c_ba", damping.conj(), Reference::new("c_ba", TimePattern::Current))
        .term("c_ba", -ta.conj(), Reference::new(y_name(b, b), TimePattern::Diagonal))
        .term("c_ba", -tb, Reference::new(x_name(a, a), TimePattern::Diagonal));

    for nu in Cavity::BOTH {
        for mu in Cavity::BOTH {
            let (x, y) = (x_name(nu, mu), y_name(nu, mu));
            let coeff = -transfer_coefficient(params, mu);
            let rate = -amplitude_rate(params, mu);
            eqs.term(&x, rate.conj(), Reference::new(&x, TimePattern::Own))
                .term(
                    &x,
                    coeff.conj(),
                    Reference::new(y_name(mu.other(), nu), TimePattern::SecondArgDelayed),
                )
                .term(
                    &x,
                    coeff.conj(),
                    Reference::new(x_name(nu, mu.other()), TimePattern::FirstArgDelayed),
                )
                .term(&y, rate, Reference::new(&y, TimePattern::Own))
                .term(
                    &y,
                    coeff,
                    Reference::new(x_name(mu.other(), nu), TimePattern::SecondArgDelayed),
                )
                .term(
                    &y,
                    coeff,
                    Reference::new(y_name(nu, mu.other()), TimePattern::FirstArgDelayed),
                );
        }
    }
    for (x, y, src) in [
        (x_name(a, a), y_name(a, a), ["p_a", "p_a"]),
        (x_name(b, b), y_name(b, b), ["p_b", "p_b"]),
        (x_name(a, b), y_name(a, b), ["c_ab", "c_ba"]),
        (x_name(b, a), y_name(b, a), ["c_ba", "c_ab"]),
    ] {
        eqs.source(x, ONE, src[0], false).source(y, ONE, src[1], false);
    }
    finish(eqs)
}

/// Variables of the two-photon model.
pub const TWO_PHOTON_SYSTEM_VARS: [&str; 3] = ["c20", "c02", "c11"];

/// How the two-photon band variables are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TwoPhotonSource {
    /// `δ(t − t₁) ⟨n|ρ_s(t₁)|00⟩`, as in every other band equation.
    #[default]
    Value,
    /// `δ(t − t₁) ∂_t ⟨n|ρ_s(t₁)|00⟩`, kept as an alternative reading.
    Derivative,
}

/// Initial state with both photons in cavity A.
pub fn two_photon_initial() -> Vec<(&'static str, Complex64)> {
    vec![("c20", ONE)]
}

/// Two-photon coherence equations.
pub fn build_two_photon(params: &CavityParams, source: TwoPhotonSource) -> Result<EquationSet, ModelError> {
    checked(params)?;
    let mut eqs = EquationSet::new("two_photon", params.tau_fs);
    for name in TWO_PHOTON_SYSTEM_VARS {
        eqs.system_var(name);
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let zero = Complex64::new(0.0, 0.0);

    // Names per cavity μ (the cavity still holding a photon).
    struct Names {
        /// Photon left in μ after the other cavity emitted from |11⟩.
        cross: &'static str,
        /// Photon left in μ after μ itself went from two photons to one.
        double: &'static str,
        /// Photon in μ after μ emitted its only photon; no source.
        refill: &'static str,
        pair: &'static str,
    }
    let names = |mu: Cavity| match mu {
        Cavity::A => Names {
            cross: "q10_0b1b",
            double: "q10_1a2a",
            refill: "q10_0a1a",
            pair: "c20",
        },
        Cavity::B => Names {
            cross: "q01_0a1a",
            double: "q01_1b2b",
            refill: "q01_0b1b",
            pair: "c02",
        },
    };
    for mu in Cavity::BOTH {
        let n = names(mu);
        eqs.band_var(n.cross).band_var(n.double).band_var(n.refill);
    }
    let derivative = source == TwoPhotonSource::Derivative;

    let rate_sum = amplitude_rate(params, Cavity::A) + amplitude_rate(params, Cavity::B);
    eqs.term("c11", -rate_sum, Reference::new("c11", TimePattern::Current));
    for mu in Cavity::BOTH {
        let (own, other) = (names(mu), names(mu.other()));
        let t = transfer_coefficient(params, mu);
        let rate = amplitude_rate(params, mu);
        eqs.term(own.pair, -2.0 * rate, Reference::new(own.pair, TimePattern::Current))
            .term(own.pair, -sqrt2 * t, Reference::new(own.cross, TimePattern::Diagonal))
            .term("c11", -sqrt2 * t, Reference::new(other.double, TimePattern::Diagonal))
            .term("c11", -t, Reference::new(other.refill, TimePattern::Diagonal));

        eqs.term(own.cross, -rate, Reference::new(own.cross, TimePattern::Own))
            .term(
                own.cross,
                -sqrt2 * t,
                Reference::new(other.double, TimePattern::SecondArgDelayed),
            )
            .term(
                own.cross,
                -t,
                Reference::new(other.refill, TimePattern::SecondArgDelayed),
            )
            .term(own.double, -rate, Reference::new(own.double, TimePattern::Own))
            .term(own.refill, -rate, Reference::new(own.refill, TimePattern::Own))
            .term(own.refill, -t, Reference::new(own.cross, TimePattern::SecondArgDelayed));

        eqs.source(own.cross, ONE, "c11", false)
            .source(own.double, ONE, own.pair, false)
            .source(own.refill, zero, own.pair, false);
    }
    if derivative {
        for src in eqs.sources.iter_mut() {
            src.derivative = true;
        }
    }
    finish(eqs)
}

/// Largest deviations between a density-matrix run and the pure state built
/// from wave-function amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub max_dev_p_a: f64,
    pub max_dev_p_b: f64,
    pub max_dev_c_ab: f64,
}

impl CrosscheckReport {
    pub fn max(&self) -> f64 {
        self.max_dev_p_a.max(self.max_dev_p_b).max(self.max_dev_c_ab)
    }
}

/// Compares `p_a`, `p_b`, `c_ab` against `|N_A|²`, `|N_B|²`, `N_A N_B*`.
pub fn pure_state_crosscheck(single: &Trajectory, wave: &WaveTrajectory) -> Result<CrosscheckReport, ModelError> {
    if single.times_fs.len() != wave.times_fs.len() {
        return Err(ModelError::GridMismatch(format!(
            "{} density-matrix samples vs {} amplitude samples",
            single.times_fs.len(),
            wave.times_fs.len()
        )));
    }
    let step = single.diagnostics.step_fs;
    if let Some((n, _)) = single
        .times_fs
        .iter()
        .zip(&wave.times_fs)
        .enumerate()
        .find(|(_, (a, b))| (*a - *b).abs() > 1e-9 * step.max(1.0))
    {
        return Err(ModelError::GridMismatch(format!("sample {n} is at a different time")));
    }
    let get = |name: &str| {
        single
            .series(name)
            .ok_or_else(|| ModelError::GridMismatch(format!("trajectory has no `{name}` series")))
    };
    let (p_a, p_b, c_ab) = (get("p_a")?, get("p_b")?, get("c_ab")?);
    let mut report = CrosscheckReport {
        max_dev_p_a: 0.0,
        max_dev_p_b: 0.0,
        max_dev_c_ab: 0.0,
    };
    for n in 0..p_a.len() {
        let (na, nb) = (wave.n_a[n], wave.n_b[n]);
        report.max_dev_p_a = report.max_dev_p_a.max((p_a[n] - na.norm_sqr()).norm());
        report.max_dev_p_b = report.max_dev_p_b.max((p_b[n] - nb.norm_sqr()).norm());
        report.max_dev_c_ab = report.max_dev_c_ab.max((c_ab[n] - na * nb.conj()).norm());
    }
    Ok(report)
}
