//! Analytic physics of two identical 1D dielectric slabs acting as
//! quasinormal-mode cavities.
//!
//! Every quantity here is closed form. The slab sits in `|x| < L/2`, has
//! permittivity `eps_slab` and is embedded in a background of permittivity
//! `eps_background`; the second slab is the same structure shifted by the
//! separation `R`.
//!
//! Frequencies are first produced as the dimensionless number
//! `z = ω̃ L / c`. Turning `z` into an energy needs a choice between the
//! angular reading (`ħ z c / L`) and the cyclic one (`ħ z 2πc / L`); see
//! [`FrequencyConvention`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{HBAR_EV_FS, SPEED_OF_LIGHT_UM_PER_FS};

/// Below this magnitude `sin(x)/x` is evaluated from its Taylor series.
const SINC_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnmError {
    #[error("invalid slab parameters: {0}")]
    InvalidSlab(String),
    #[error("slab and background permittivities coincide ({0}); the QNM decay rate is singular")]
    DegeneratePermittivity(f64),
    #[error("x = {x} μm lies outside the slab (|x| must be < {half_length} μm); use the regularized mode")]
    OutsideSlab { x: f64, half_length: f64 },
    #[error("x = {x} μm lies inside the slab (|x| must be > {half_length} μm); use the mode function")]
    InsideSlab { x: f64, half_length: f64 },
    #[error("lossless cavity (γ = 0) has no finite overlap normalisation")]
    Lossless,
    #[error("invalid cavity parameters: {0}")]
    InvalidCavity(String),
}

/// Geometry and material of one slab; the second slab is identical and sits
/// `separation_um` further along the axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabParams {
    pub length_um: f64,
    pub eps_slab: f64,
    pub eps_background: f64,
    pub separation_um: f64,
    pub mode_index: u32,
}

impl SlabParams {
    pub fn new(length_um: f64, eps_slab: f64, eps_background: f64, separation_um: f64) -> Result<Self, QnmError> {
        let slab = Self {
            length_um,
            eps_slab,
            eps_background,
            separation_um,
            mode_index: 1,
        };
        slab.validate()?;
        Ok(slab)
    }

    pub fn with_mode_index(mut self, mode_index: u32) -> Result<Self, QnmError> {
        self.mode_index = mode_index;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), QnmError> {
        let finite = [self.length_um, self.eps_slab, self.eps_background, self.separation_um]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(QnmError::InvalidSlab("all parameters must be finite".into()));
        }
        if self.length_um <= 0.0 {
            return Err(QnmError::InvalidSlab(format!(
                "length must be positive, got {}",
                self.length_um
            )));
        }
        if self.separation_um < 0.0 {
            return Err(QnmError::InvalidSlab(format!(
                "separation must be non-negative, got {}",
                self.separation_um
            )));
        }
        if self.eps_background < 1.0 {
            return Err(QnmError::InvalidSlab(format!(
                "background permittivity must be >= 1, got {}",
                self.eps_background
            )));
        }
        if self.eps_slab == self.eps_background {
            return Err(QnmError::DegeneratePermittivity(self.eps_slab));
        }
        if self.eps_slab < self.eps_background {
            return Err(QnmError::InvalidSlab(format!(
                "slab permittivity {} must exceed the background {}",
                self.eps_slab, self.eps_background
            )));
        }
        if self.mode_index == 0 {
            return Err(QnmError::InvalidSlab("mode index starts at 1".into()));
        }
        Ok(())
    }

    pub fn n_slab(&self) -> f64 {
        self.eps_slab.sqrt()
    }

    pub fn n_background(&self) -> f64 {
        self.eps_background.sqrt()
    }

    /// Photon flight time between the slab centres, `n_B R / c`.
    pub fn delay_fs(&self) -> f64 {
        self.n_background() * self.separation_um / SPEED_OF_LIGHT_UM_PER_FS
    }
}

/// How the dimensionless `z = ω̃L/c` is converted to an energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyConvention {
    /// `ħω = ħ z c / L`.
    Angular,
    /// `ħω = ħ z 2πc / L`; reproduces the 0.06 eV / 0.0124 eV cavity used
    /// for the shipped presets.
    #[default]
    Cyclic,
}

impl FrequencyConvention {
    fn scale(self) -> f64 {
        match self {
            FrequencyConvention::Angular => 1.0,
            FrequencyConvention::Cyclic => 2.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QnmFrequency {
    /// `ω̃ L / c`, independent of any unit convention.
    pub z: Complex64,
    pub omega_ev: f64,
    pub gamma_ev: f64,
    pub convention: FrequencyConvention,
}

impl QnmFrequency {
    /// `γ/ω`, the one number that does not depend on the convention.
    pub fn loss_ratio(&self) -> f64 {
        -self.z.im / self.z.re
    }
}

/// Complex QNM frequency of mode `slab.mode_index`.
pub fn qnm_frequency(slab: &SlabParams, convention: FrequencyConvention) -> Result<QnmFrequency, QnmError> {
    slab.validate()?;
    let z = dimensionless_frequency(slab, slab.mode_index);
    let energy_per_z = HBAR_EV_FS * convention.scale() * SPEED_OF_LIGHT_UM_PER_FS / slab.length_um;
    Ok(QnmFrequency {
        z,
        omega_ev: z.re * energy_per_z,
        gamma_ev: -z.im * energy_per_z,
        convention,
    })
}

fn dimensionless_frequency(slab: &SlabParams, mu: u32) -> Complex64 {
    let (nr, nb) = (slab.n_slab(), slab.n_background());
    let reflection = ((nr - nb) / (nr + nb)).powi(2);
    Complex64::new(2.0 * PI * f64::from(mu), reflection.ln()) / (2.0 * nr)
}

/// Complex angular QNM frequency `ω̃_μ` in rad/fs.
pub fn angular_frequency(slab: &SlabParams, mu: u32) -> Complex64 {
    dimensionless_frequency(slab, mu) * (SPEED_OF_LIGHT_UM_PER_FS / slab.length_um)
}

/// Unnormalized sinc, `sin(x)/x`, for complex arguments.
pub fn sinc(x: Complex64) -> Complex64 {
    if x.norm() < SINC_SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// QNM field `f̃_μ(x)` inside the slab (`|x| < L/2`).
pub fn mode_function(slab: &SlabParams, x: f64, mu: u32) -> Result<Complex64, QnmError> {
    slab.validate()?;
    let half = slab.length_um / 2.0;
    if x.abs() >= half {
        return Err(QnmError::OutsideSlab { x, half_length: half });
    }
    let k = angular_frequency(slab, mu) / SPEED_OF_LIGHT_UM_PER_FS;
    let phase = Complex64::i() * slab.n_slab() * k * x;
    let parity = Complex64::from_polar(1.0, PI * f64::from(mu));
    Ok(phase.exp() + (-phase).exp() * parity)
}

/// Factor `M_μ(ω)` of the regularized mode; `omega` is an angular frequency
/// in rad/fs and may be complex.
///
/// For the first mode this is
/// `(i/2) L Δε [si((ω + n_R ω̃)L/2c) − si((ω − n_R ω̃)L/2c)]`; higher modes pick
/// up the parity `e^{iμπ}` on the second term. The background index scales
/// `ω` (it is 1 for the vacuum background).
pub fn regularized_factor(slab: &SlabParams, omega: Complex64) -> Complex64 {
    let mu = slab.mode_index;
    let half_l_over_c = slab.length_um / (2.0 * SPEED_OF_LIGHT_UM_PER_FS);
    let k_slab = slab.n_slab() * angular_frequency(slab, mu);
    let k_bg = slab.n_background() * omega;
    let parity = Complex64::from_polar(1.0, PI * f64::from(mu));
    let bracket = sinc((k_bg + k_slab) * half_l_over_c) + parity * sinc((k_bg - k_slab) * half_l_over_c);
    Complex64::i() * 0.5 * slab.length_um * (slab.eps_slab - slab.eps_background) * bracket
}

/// Regularized mode `F̃_μ(x, ω)` outside the slab (`|x| > L/2`).
///
/// This is the slab polarisation propagated with the outgoing background
/// Green function, normalised so that at `ω = ω̃_μ` it joins the QNM field
/// continuously at the slab faces.
pub fn regularized_mode(slab: &SlabParams, x: f64, omega: Complex64) -> Result<Complex64, QnmError> {
    slab.validate()?;
    let half = slab.length_um / 2.0;
    if x.abs() <= half {
        return Err(QnmError::InsideSlab { x, half_length: half });
    }
    let k_bg = slab.n_background() * omega / SPEED_OF_LIGHT_UM_PER_FS;
    // Lippmann-Schwinger prefactor k0²/k_B.
    let prefactor = omega / SPEED_OF_LIGHT_UM_PER_FS / slab.n_background();
    let outgoing = (Complex64::i() * k_bg * x.abs()).exp();
    let side = if x > 0.0 {
        Complex64::from_polar(1.0, PI * f64::from(slab.mode_index))
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(side * prefactor * regularized_factor(slab, omega) * outgoing)
}

/// Background Green function `G_B(x, x', ω) = i e^{−iω|x−x'|/c} / 2` for a
/// real angular frequency in rad/fs.
pub fn background_green(x: f64, x2: f64, omega: f64) -> Complex64 {
    let phase = -omega * (x - x2).abs() / SPEED_OF_LIGHT_UM_PER_FS;
    Complex64::i() * Complex64::from_polar(0.5, phase)
}

/// Commutator overlaps of the unsymmetrised QNM operators of the two slabs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlaps {
    /// `S_AA` in μm³.
    pub s_aa: f64,
    /// `S_AB` in μm³.
    pub s_ab: f64,
}

impl Overlaps {
    pub fn ratio(&self) -> f64 {
        self.s_ab / self.s_aa
    }
}

/// `S_AA = (2c/γ₁)|M₁(ω̃₁)|²` and
/// `S_AB = S_AA Re{(ω̃₁/2ω₁) e^{−iω₁R/c}} e^{−γ₁R/c}`.
pub fn overlaps(slab: &SlabParams) -> Result<Overlaps, QnmError> {
    slab.validate()?;
    let w = angular_frequency(slab, slab.mode_index);
    let (omega, gamma) = (w.re, -w.im);
    if gamma <= 0.0 {
        return Err(QnmError::Lossless);
    }
    let c = SPEED_OF_LIGHT_UM_PER_FS;
    let s_aa = 2.0 * c / gamma * regularized_factor(slab, w).norm_sqr();
    let retard = slab.separation_um / c;
    let phase = (w / (2.0 * omega) * Complex64::from_polar(1.0, -omega * retard)).re;
    let s_ab = s_aa * phase * (-gamma * retard).exp();
    Ok(Overlaps { s_aa, s_ab })
}

/// Which of the two cavities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cavity {
    A,
    B,
}

impl Cavity {
    pub const BOTH: [Cavity; 2] = [Cavity::A, Cavity::B];

    pub fn index(self) -> usize {
        match self {
            Cavity::A => 0,
            Cavity::B => 1,
        }
    }

    pub fn other(self) -> Cavity {
        match self {
            Cavity::A => Cavity::B,
            Cavity::B => Cavity::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Cavity::A => "a",
            Cavity::B => "b",
        }
    }
}

/// Spectral description of the two cavities as consumed by the simulators.
///
/// Energies are in eV and the delay in fs. `coupling_ev[μ][η]` is `V_μη`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub omega_ev: [f64; 2],
    pub gamma_ev: [f64; 2],
    pub coupling_ev: [[Complex64; 2]; 2],
    pub tau_fs: f64,
}

impl CavityParams {
    /// Two identical cavities with `V_μη = (1 + δ_μη) γ / 2`.
    pub fn identical(omega_ev: f64, gamma_ev: f64, tau_fs: f64) -> Result<Self, QnmError> {
        let self_coupling = Complex64::new(gamma_ev, 0.0);
        let cross = Complex64::new(gamma_ev / 2.0, 0.0);
        let params = Self {
            omega_ev: [omega_ev; 2],
            gamma_ev: [gamma_ev; 2],
            coupling_ev: [[self_coupling, cross], [cross, self_coupling]],
            tau_fs,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same as `self` with every coupling element multiplied by `factor`.
    pub fn with_coupling_scaled(mut self, factor: f64) -> Self {
        for row in self.coupling_ev.iter_mut() {
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
        self
    }

    pub fn validate(&self) -> Result<(), QnmError> {
        let finite = self.omega_ev.iter().chain(&self.gamma_ev).all(|v| v.is_finite())
            && self.tau_fs.is_finite()
            && self.coupling_ev.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(QnmError::InvalidCavity("all parameters must be finite".into()));
        }
        if self.gamma_ev.iter().any(|&g| g < 0.0) {
            return Err(QnmError::InvalidCavity("decay rates must be non-negative".into()));
        }
        if self.tau_fs < 0.0 {
            return Err(QnmError::InvalidCavity(format!(
                "delay must be non-negative, got {} fs",
                self.tau_fs
            )));
        }
        Ok(())
    }

    pub fn omega(&self, c: Cavity) -> f64 {
        self.omega_ev[c.index()]
    }

    pub fn gamma(&self, c: Cavity) -> f64 {
        self.gamma_ev[c.index()]
    }

    /// `V_μη` in eV.
    pub fn coupling(&self, mu: Cavity, eta: Cavity) -> Complex64 {
        self.coupling_ev[mu.index()][eta.index()]
    }

    /// Delay between cavities `mu` and `eta`: `τ` across, zero on the diagonal.
    pub fn delay(&self, mu: Cavity, eta: Cavity) -> f64 {
        if mu == eta {
            0.0
        } else {
            self.tau_fs
        }
    }

    /// Frame frequency: the mean cavity energy in eV.
    pub fn frame_omega_ev(&self) -> f64 {
        0.5 * (self.omega_ev[0] + self.omega_ev[1])
    }

    /// Offset of cavity `c` from the frame frequency, in eV.
    pub fn detuning_ev(&self, c: Cavity) -> f64 {
        self.omega(c) - self.frame_omega_ev()
    }

    /// `e^{i ω τ / ħ}` at the frame frequency.
    pub fn carrier_phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.frame_omega_ev() * self.tau_fs / HBAR_EV_FS)
    }
}

/// Cavity parameters for the lowest mode of two identical slabs.
pub fn derive_cavity_params(slab: &SlabParams, convention: FrequencyConvention) -> Result<CavityParams, QnmError> {
    let freq = qnm_frequency(slab, convention)?;
    CavityParams::identical(freq.omega_ev, freq.gamma_ev, slab.delay_fs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_slab() -> SlabParams {
        SlabParams::new(21.0, PI * PI, 1.0, 50.0 * 21.0).unwrap()
    }

    #[test]
    fn first_mode_frequency() {
        let f = qnm_frequency(&reference_slab(), FrequencyConvention::Cyclic).unwrap();
        assert!((f.z.re - 1.0).abs() < 1e-12);
        assert!((f.z.im + 0.21).abs() < 0.005);
        assert!((f.omega_ev - 0.059).abs() < 0.0005, "{}", f.omega_ev);
        assert!((f.gamma_ev - 0.0124).abs() < 0.0001, "{}", f.gamma_ev);
    }

    #[test]
    fn second_mode_doubles_real_part() {
        let s1 = reference_slab();
        let s2 = s1.with_mode_index(2).unwrap();
        let z1 = qnm_frequency(&s1, FrequencyConvention::Angular).unwrap().z;
        let z2 = qnm_frequency(&s2, FrequencyConvention::Angular).unwrap().z;
        assert!((z2.re - 2.0 * z1.re).abs() < 1e-12);
        assert_eq!(z2.im, z1.im);
    }

    #[test]
    fn frequency_is_scale_free() {
        let s1 = reference_slab();
        let s2 = SlabParams::new(42.0, PI * PI, 1.0, 0.0).unwrap();
        let z1 = qnm_frequency(&s1, FrequencyConvention::Cyclic).unwrap().z;
        let z2 = qnm_frequency(&s2, FrequencyConvention::Cyclic).unwrap().z;
        assert_eq!(z1, z2);
    }

    #[test]
    fn conventions_differ_by_two_pi() {
        let s = reference_slab();
        let a = qnm_frequency(&s, FrequencyConvention::Angular).unwrap();
        let c = qnm_frequency(&s, FrequencyConvention::Cyclic).unwrap();
        assert!((c.omega_ev / a.omega_ev - 2.0 * PI).abs() < 1e-12);
        assert!((c.loss_ratio() - a.loss_ratio()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_permittivity_rejected() {
        let err = SlabParams::new(21.0, 2.0, 2.0, 0.0).unwrap_err();
        assert_eq!(err, QnmError::DegeneratePermittivity(2.0));
        assert!(SlabParams::new(21.0, 1.5, 2.0, 0.0).is_err());
        assert!(SlabParams::new(-1.0, 4.0, 1.0, 0.0).is_err());
        assert!(SlabParams::new(1.0, 4.0, 1.0, -3.0).is_err());
    }

    #[test]
    fn mode_function_node_and_antinode() {
        let s = reference_slab();
        assert!(mode_function(&s, 0.0, 1).unwrap().norm() < 1e-15);
        assert!((mode_function(&s, 0.0, 2).unwrap() - 2.0).norm() < 1e-15);
    }

    #[test]
    fn mode_function_is_odd_for_first_mode() {
        let s = reference_slab();
        for &x in &[0.3, 1.7, 4.2, 9.9, 10.4] {
            let plus = mode_function(&s, x, 1).unwrap();
            let minus = mode_function(&s, -x, 1).unwrap();
            assert!((plus + minus).norm() < 1e-12 * plus.norm().max(1.0));
        }
    }

    #[test]
    fn mode_function_rejects_points_outside() {
        let s = reference_slab();
        assert!(matches!(mode_function(&s, 10.5, 1), Err(QnmError::OutsideSlab { .. })));
        assert!(matches!(
            regularized_mode(&s, 1.0, Complex64::new(0.1, 0.0)),
            Err(QnmError::InsideSlab { .. })
        ));
    }

    #[test]
    fn regularized_factor_vanishes_at_zero_and_decays() {
        let s = reference_slab();
        assert!(regularized_factor(&s, Complex64::new(0.0, 0.0)).norm() < 1e-14);
        let w1 = angular_frequency(&s, 1).re;
        let near = regularized_factor(&s, Complex64::new(10.0 * w1, 0.0)).norm();
        let far = regularized_factor(&s, Complex64::new(100.0 * w1, 0.0)).norm();
        assert!(far < near, "{far} !< {near}");
    }

    #[test]
    fn sinc_series_matches_direct_form() {
        for &x in &[1e-5, 5e-5, 9.99e-5] {
            let z = Complex64::new(x, 0.3 * x);
            let direct = z.sin() / z;
            assert!((sinc(z) - direct).norm() < 1e-15);
        }
        assert_eq!(sinc(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn mode_joins_regularized_form_at_faces() {
        let s = reference_slab();
        let w = angular_frequency(&s, 1);
        let half = s.length_um / 2.0;
        for sign in [-1.0, 1.0] {
            let inside = mode_function(&s, sign * (half - 1e-9), 1).unwrap();
            let outside = regularized_mode(&s, sign * (half + 1e-9), w).unwrap();
            let rel = (inside.norm() - outside.norm()).abs() / inside.norm();
            assert!(rel < 1e-6, "relative mismatch {rel}");
            assert!((inside - outside).norm() / inside.norm() < 1e-6);
        }
    }

    #[test]
    fn green_function_is_a_symmetric_phase() {
        let g = background_green(1.0, 1.0, 0.3);
        assert!((g - Complex64::new(0.0, 0.5)).norm() < 1e-16);
        let a = background_green(-3.0, 7.5, 0.12);
        let b = background_green(7.5, -3.0, 0.12);
        assert_eq!(a, b);
        assert!((a.norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlap_at_zero_separation_is_half() {
        let s = SlabParams::new(21.0, PI * PI, 1.0, 0.0).unwrap();
        let o = overlaps(&s).unwrap();
        assert!((o.ratio() - 0.5).abs() < 1e-12);
        assert!(o.s_aa > 0.0);
    }

    #[test]
    fn overlap_vanishes_far_apart() {
        let s = SlabParams::new(21.0, PI * PI, 1.0, 1e4 * 21.0).unwrap();
        assert!(overlaps(&s).unwrap().s_ab.abs() < 1e-12);
    }

    #[test]
    fn derived_couplings() {
        let p = CavityParams::identical(0.06, 0.0124, 44_000.0).unwrap();
        assert_eq!(p.coupling(Cavity::A, Cavity::B).re, 0.0062);
        assert_eq!(p.coupling(Cavity::B, Cavity::A).re, 0.0062);
        assert_eq!(p.coupling(Cavity::A, Cavity::A).re, 0.0124);
        assert_eq!(p.delay(Cavity::A, Cavity::A), 0.0);
        assert_eq!(p.delay(Cavity::A, Cavity::B), 44_000.0);
    }

    #[test]
    fn derived_delay_from_separation() {
        let s = SlabParams::new(21.0, PI * PI, 1.0, 13_190.0).unwrap();
        let p = derive_cavity_params(&s, FrequencyConvention::Cyclic).unwrap();
        assert!((p.tau_fs - 44_000.0).abs() < 100.0, "{}", p.tau_fs);
        assert_eq!(p, derive_cavity_params(&s, FrequencyConvention::Cyclic).unwrap());
    }

    #[test]
    fn cavity_validation() {
        assert!(CavityParams::identical(0.06, -0.1, 1.0).is_err());
        assert!(CavityParams::identical(0.06, 0.1, -1.0).is_err());
        assert!(CavityParams::identical(f64::NAN, 0.1, 1.0).is_err());
    }
}
