//! Reference solvers that share no code with the hierarchy engine.
//!
//! [`run_wavefunction`] integrates the delay equations for the two cavity
//! amplitudes of a single excitation,
//! `∂_t N_A = −(γ_A + iδ_A) N_A − 2V*_BA e^{iω̄τ/ħ} N_B(t − τ) Θ(t − τ)`
//! and its A↔B image, in the frame rotating at the mean cavity energy.
//!
//! [`run_discretized_bath`] replaces the continuum by `M` right-moving and `M`
//! left-moving modes and solves the Schrödinger equation of the
//! single-excitation sector directly.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::HBAR_EV_FS;
use crate::engine::{delay_steps, EngineError};
use crate::qnm::{Cavity, CavityParams, QnmError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Params(#[from] QnmError),
    #[error(transparent)]
    Grid(#[from] EngineError),
    #[error("the oracle needs a positive delay, got {0} fs")]
    NoDelay(f64),
    #[error("invalid bath discretisation: {0}")]
    BadBath(String),
    #[error("non-finite amplitude at step {0}")]
    NonFinite(usize),
}

/// Cavity amplitudes on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTrajectory {
    pub times_fs: Vec<f64>,
    pub n_a: Vec<Complex64>,
    pub n_b: Vec<Complex64>,
}

impl WaveTrajectory {
    pub fn populations(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.n_a.iter().map(|v| v.norm_sqr()).collect(),
            self.n_b.iter().map(|v| v.norm_sqr()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.times_fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_fs.is_empty()
    }
}

fn steps(h: f64, t_end: f64) -> Result<usize, OracleError> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(EngineError::BadEndTime(t_end).into());
    }
    Ok((t_end / h + 1e-9).floor() as usize)
}

/// Amplitude state of the delay equations with a ring buffer spanning one
/// delay.
#[derive(Debug, Clone)]
pub struct WaveState {
    h: f64,
    step: usize,
    amps: [Complex64; 2],
    history: VecDeque<[Complex64; 2]>,
    delay_steps: usize,
    factor: [Complex64; 2],
    transfer: [Complex64; 2],
}

impl WaveState {
    pub fn new(params: &CavityParams, initial: [Complex64; 2], h: f64) -> Result<Self, OracleError> {
        params.validate()?;
        if params.tau_fs <= 0.0 {
            return Err(OracleError::NoDelay(params.tau_fs));
        }
        let k = delay_steps(params.tau_fs, h)?;
        let phase = params.carrier_phase();
        let mut factor = [ZERO; 2];
        let mut transfer = [ZERO; 2];
        for mu in Cavity::BOTH {
            let i = mu.index();
            let rate = Complex64::new(params.gamma(mu), params.detuning_ev(mu)) / HBAR_EV_FS;
            factor[i] = (-rate * h).exp();
            transfer[i] = 2.0 * params.coupling(mu.other(), mu).conj() * phase / HBAR_EV_FS;
        }
        let mut history = VecDeque::with_capacity(k + 1);
        history.push_back(initial);
        Ok(Self {
            h,
            step: 0,
            amps: initial,
            history,
            delay_steps: k,
            factor,
            transfer,
        })
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amps
    }

    pub fn time_fs(&self) -> f64 {
        self.step as f64 * self.h
    }

    /// Amplitudes at step `n` if still held, zero before the start.
    fn past(&self, n: i64) -> [Complex64; 2] {
        if n < 0 {
            return [ZERO; 2];
        }
        let oldest = self.step as i64 + 1 - self.history.len() as i64;
        self.history[(n - oldest) as usize]
    }

    /// Delayed coupling at step `n`. `left` selects the limit from the left,
    /// which differs from the stored value only where the history switches
    /// on at `n = K`.
    fn forcing(&self, n: i64, left: bool) -> [Complex64; 2] {
        let m = n - self.delay_steps as i64;
        if left && m == 0 {
            return [ZERO; 2];
        }
        let d = self.past(m);
        [-self.transfer[0] * d[1], -self.transfer[1] * d[0]]
    }

    /// Heun step in integrating-factor form. The forcing only involves
    /// amplitudes at least one delay old, so both stages are explicit.
    pub fn step(&mut self) -> Result<(), OracleError> {
        let n = self.step as i64;
        let (g0, g1) = (self.forcing(n, false), self.forcing(n + 1, true));
        let mut next = [ZERO; 2];
        for i in 0..2 {
            let e = self.factor[i];
            next[i] = e * self.amps[i] + 0.5 * self.h * (e * g0[i] + g1[i]);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite(self.step + 1));
        }
        self.amps = next;
        self.step += 1;
        self.history.push_back(next);
        if self.history.len() > self.delay_steps + 1 {
            self.history.pop_front();
        }
        Ok(())
    }
}

/// Delay equations from `N_A(0) = 1`, `N_B(0) = 0`.
pub fn run_wavefunction(params: &CavityParams, h: f64, t_end: f64) -> Result<WaveTrajectory, OracleError> {
    run_wavefunction_from(params, [Complex64::new(1.0, 0.0), ZERO], h, t_end)
}

pub fn run_wavefunction_from(
    params: &CavityParams,
    initial: [Complex64; 2],
    h: f64,
    t_end: f64,
) -> Result<WaveTrajectory, OracleError> {
    let mut state = WaveState::new(params, initial, h)?;
    let n = steps(h, t_end)?;
    let mut out = WaveTrajectory {
        times_fs: Vec::with_capacity(n + 1),
        n_a: Vec::with_capacity(n + 1),
        n_b: Vec::with_capacity(n + 1),
    };
    let record = |s: &WaveState, out: &mut WaveTrajectory| {
        out.times_fs.push(s.time_fs());
        out.n_a.push(s.amplitudes()[0]);
        out.n_b.push(s.amplitudes()[1]);
    };
    record(&state, &mut out);
    for _ in 0..n {
        state.step()?;
        record(&state, &mut out);
    }
    Ok(out)
}

/// Uniform mode grid for the brute-force bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathGrid {
    /// Modes per direction.
    pub modes: usize,
    /// Half-width of the band around the frame energy, in eV.
    pub half_width_ev: f64,
}

/// Cavity amplitudes and total norm from a discretised-bath run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathTrajectory {
    pub wave: WaveTrajectory,
    pub norm: Vec<f64>,
}

/// Single-excitation Schrödinger equation with `2M` chiral bath modes.
///
/// Mode `k` sits at `ω̄ + Δ_k` with `Δ_k` the midpoints of `M` equal cells
/// spanning `[−Δ, Δ]`. Cavity `μ` at position `x_μ` (`x_A = 0`, `x_B = R`)
/// couples to right movers with `√(γ_μ δω / 2π) e^{−i(ω̄+Δ_k)x_μ/c}` and to
/// left movers with the conjugate phase. The resulting memory kernel is the
/// delayed delta with `V_AB = √(γ_A γ_B)/2`; the coupling entries of
/// `params` are not used. Steps are Crank-Nicolson, which is exactly unitary.
pub fn run_discretized_bath(
    params: &CavityParams,
    grid: BathGrid,
    h: f64,
    t_end: f64,
) -> Result<BathTrajectory, OracleError> {
    params.validate()?;
    if grid.modes < 2 {
        return Err(OracleError::BadBath(format!(
            "need at least 2 modes, got {}",
            grid.modes
        )));
    }
    if !(grid.half_width_ev.is_finite() && grid.half_width_ev > 0.0) {
        return Err(OracleError::BadBath(format!(
            "half-width must be positive, got {}",
            grid.half_width_ev
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(EngineError::BadStep(h).into());
    }
    let n_steps = steps(h, t_end)?;
    let m = grid.modes;
    // Rates in rad/fs.
    let half = grid.half_width_ev / HBAR_EV_FS;
    let cell = 2.0 * half / m as f64;
    let frame = params.frame_omega_ev() / HBAR_EV_FS;
    let tau = params.tau_fs;
    let detune: Vec<f64> = (0..m).map(|k| -half + (k as f64 + 0.5) * cell).collect();
    let cavity_detune = [
        params.detuning_ev(Cavity::A) / HBAR_EV_FS,
        params.detuning_ev(Cavity::B) / HBAR_EV_FS,
    ];

    // Bath index: 0..m right movers, m..2m left movers.
    let modes = 2 * m;
    let mut coupling = vec![[ZERO; 2]; modes];
    let mut energy = vec![0.0; modes];
    for k in 0..m {
        for mu in Cavity::BOTH {
            let amp = (params.gamma(mu) / HBAR_EV_FS * cell / (2.0 * std::f64::consts::PI)).sqrt();
            let x_over_c = if mu == Cavity::A { 0.0 } else { tau };
            let phase = (frame + detune[k]) * x_over_c;
            coupling[k][mu.index()] = Complex64::from_polar(amp, -phase);
            coupling[m + k][mu.index()] = Complex64::from_polar(amp, phase);
        }
        energy[k] = detune[k];
        energy[m + k] = detune[k];
    }

    let ih2 = Complex64::new(0.0, 0.5 * h);
    let d: Vec<Complex64> = energy.iter().map(|&w| 1.0 + ih2 * w).collect();
    let d_minus: Vec<Complex64> = energy.iter().map(|&w| 1.0 - ih2 * w).collect();
    let mut schur = [[ZERO; 2]; 2];
    for k in 0..modes {
        for mu in 0..2 {
            for eta in 0..2 {
                schur[mu][eta] += coupling[k][mu] * coupling[k][eta].conj() / d[k];
            }
        }
    }
    // Cavity block of (1 + ihH/2) after eliminating the bath.
    let quarter_h2 = 0.25 * h * h;
    let mut lhs = [[ZERO; 2]; 2];
    for mu in 0..2 {
        for eta in 0..2 {
            lhs[mu][eta] = quarter_h2 * schur[mu][eta];
        }
        lhs[mu][mu] += 1.0 + ih2 * cavity_detune[mu];
    }
    let det = lhs[0][0] * lhs[1][1] - lhs[0][1] * lhs[1][0];

    let mut cav = [Complex64::new(1.0, 0.0), ZERO];
    let mut bath = vec![ZERO; modes];
    let mut rhs_bath = vec![ZERO; modes];

    let mut out = BathTrajectory {
        wave: WaveTrajectory {
            times_fs: Vec::with_capacity(n_steps + 1),
            n_a: Vec::with_capacity(n_steps + 1),
            n_b: Vec::with_capacity(n_steps + 1),
        },
        norm: Vec::with_capacity(n_steps + 1),
    };
    let record = |n: usize, cav: &[Complex64; 2], bath: &[Complex64], out: &mut BathTrajectory| {
        out.wave.times_fs.push(n as f64 * h);
        out.wave.n_a.push(cav[0]);
        out.wave.n_b.push(cav[1]);
        out.norm
            .push(cav.iter().map(|v| v.norm_sqr()).sum::<f64>() + bath.iter().map(|v| v.norm_sqr()).sum::<f64>());
    };
    record(0, &cav, &bath, &mut out);

    for n in 0..n_steps {
        // (1 − ihH/2) ψ
        let mut rhs_cav = [ZERO; 2];
        for mu in 0..2 {
            rhs_cav[mu] = (1.0 - ih2 * cavity_detune[mu]) * cav[mu];
        }
        for k in 0..modes {
            let c = coupling[k];
            rhs_cav[0] -= ih2 * c[0] * bath[k];
            rhs_cav[1] -= ih2 * c[1] * bath[k];
            rhs_bath[k] = d_minus[k] * bath[k] - ih2 * (c[0].conj() * cav[0] + c[1].conj() * cav[1]);
        }
        // Eliminate the bath from (1 + ihH/2) ψ' = rhs.
        let mut reduced = rhs_cav;
        for k in 0..modes {
            let r = rhs_bath[k] / d[k];
            reduced[0] -= ih2 * coupling[k][0] * r;
            reduced[1] -= ih2 * coupling[k][1] * r;
        }
        cav = [
            (lhs[1][1] * reduced[0] - lhs[0][1] * reduced[1]) / det,
            (lhs[0][0] * reduced[1] - lhs[1][0] * reduced[0]) / det,
        ];
        for k in 0..modes {
            let c = coupling[k];
            bath[k] = (rhs_bath[k] - ih2 * (c[0].conj() * cav[0] + c[1].conj() * cav[1])) / d[k];
        }
        if !(cav[0].is_finite() && cav[1].is_finite()) {
            return Err(OracleError::NonFinite(n + 1));
        }
        record(n + 1, &cav, &bath, &mut out);
    }
    Ok(out)
}

/// `max_t max(|ΔN_A|, |ΔN_B|)` between two runs on the same grid, comparing
/// every `stride`-th sample of `fine` with `coarse`.
pub fn max_amplitude_deviation(coarse: &WaveTrajectory, fine: &WaveTrajectory, stride: usize) -> f64 {
    coarse
        .n_a
        .iter()
        .zip(&coarse.n_b)
        .enumerate()
        .filter_map(|(n, (a, b))| {
            let m = n * stride;
            (m < fine.len()).then(|| (a - fine.n_a[m]).norm().max((b - fine.n_b[m]).norm()))
        })
        .fold(0.0, f64::max)
}
