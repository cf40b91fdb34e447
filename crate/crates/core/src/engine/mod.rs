//! Fixed-step integration of linear equation sets with one-time (system) and
//! two-time (band) variables.
//!
//! All delayed references land on grid points because the step must divide
//! the delay exactly. Each variable is advanced with a Heun
//! predictor-corrector in integrating-factor form: the variable's own linear
//! rate is propagated exactly and the remaining couplings are treated with
//! the trapezoidal rule. Uncoupled decay is therefore exact to rounding.
//!
//! A band line `b(·, t_j)` is opened at step `j` with the value given by its
//! diagonal source and then evolves in its first time argument until its
//! offset reaches the band width. Every read lands at an offset of at most
//! `τ/h`, and lines at those offsets only read each other, so a band that
//! wide is exact for the system variables. The automatic width is the
//! smaller of that and the decay estimate. When the band is narrower, the
//! largest value dropped at its edge is kept as the truncation certificate.
//!
//! Delayed reads of line 0 switch on abruptly at `t = τ`. The step that ends
//! there uses the left limit (zero) in its corrector stage and the next step
//! starts from the right limit, so every step integrates a continuous
//! function and the scheme stays second order.

mod buffer;
mod equations;

pub use buffer::BandBuffer;
pub use equations::{DiagonalSource, EquationSet, Reference, Term, TimePattern, ValidationError, VarKind};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use equations::{compile, CompiledEquations, CompiledTerm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default relative size below which band values are discarded.
pub const DEFAULT_BAND_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid equation set: {}", join(.0))]
    Invalid(Vec<ValidationError>),
    #[error("step {0} fs must be positive and finite")]
    BadStep(f64),
    #[error("end time {0} fs must be non-negative and finite")]
    BadEndTime(f64),
    #[error("step {step_fs} fs does not divide the delay {delay_fs} fs")]
    StepDoesNotDivideDelay { step_fs: f64, delay_fs: f64 },
    #[error("band epsilon {0} must lie in (0, 1)")]
    BadEpsilon(f64),
    #[error("initial value given for unknown system variable `{0}`")]
    UnknownInitialVar(String),
    #[error("band storage of {vars} x {lines} x {ring} values is too large")]
    StorageTooLarge { vars: usize, lines: usize, ring: usize },
    #[error("non-finite value in `{var}` at step {step}")]
    NonFinite { step: usize, var: String },
}

fn join(errors: &[ValidationError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl From<Vec<ValidationError>> for EngineError {
    fn from(errors: Vec<ValidationError>) -> Self {
        EngineError::Invalid(errors)
    }
}

/// How many steps past the diagonal each band line is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandWidth {
    /// Enough steps for the slowest band decay to reach `epsilon`.
    Auto {
        epsilon: f64,
    },
    Fixed(usize),
}

impl Default for BandWidth {
    fn default() -> Self {
        BandWidth::Auto {
            epsilon: DEFAULT_BAND_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub step_fs: f64,
    pub t_end_fs: f64,
    pub band_width: BandWidth,
    /// Remove every `FirstArgDelayed` term before integrating.
    pub drop_noncontributing: bool,
}

impl RunConfig {
    pub fn new(step_fs: f64, t_end_fs: f64) -> Self {
        Self {
            step_fs,
            t_end_fs,
            band_width: BandWidth::default(),
            drop_noncontributing: false,
        }
    }

    pub fn with_band_width(mut self, band_width: BandWidth) -> Self {
        self.band_width = band_width;
        self
    }

    pub fn with_drop_noncontributing(mut self, drop: bool) -> Self {
        self.drop_noncontributing = drop;
        self
    }

    /// Number of steps to reach `t_end_fs`.
    pub fn steps(&self) -> usize {
        (self.t_end_fs / self.step_fs + 1e-9).floor() as usize
    }
}

/// `ceil(ln(1/ε) / (γ h))` for a decay rate `γ` in 1/fs.
pub fn auto_band_width(epsilon: f64, gamma_per_fs: f64, step_fs: f64) -> usize {
    if gamma_per_fs <= 0.0 {
        return usize::MAX;
    }
    let w = ((1.0 / epsilon).ln() / (gamma_per_fs * step_fs)).ceil();
    if w >= usize::MAX as f64 {
        usize::MAX
    } else {
        (w as usize).max(1)
    }
}

/// `τ / h` when it is an integer.
pub fn delay_steps(delay_fs: f64, step_fs: f64) -> Result<usize, EngineError> {
    if !(step_fs.is_finite() && step_fs > 0.0) {
        return Err(EngineError::BadStep(step_fs));
    }
    let k = delay_fs / step_fs;
    let rounded = k.round();
    if rounded < 1.0 || (k - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(EngineError::StepDoesNotDivideDelay { step_fs, delay_fs });
    }
    Ok(rounded as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest band magnitude dropped at the truncation edge while the band
    /// is narrower than the delay; zero otherwise.
    pub truncation_certificate: f64,
    pub band_width: usize,
    pub delay_steps: usize,
    pub step_fs: f64,
    pub steps: usize,
}

/// Time series of every system variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times_fs: Vec<f64>,
    pub names: Vec<String>,
    /// `values[var][step]`.
    pub values: Vec<Vec<Complex64>>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[Complex64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.values[k].as_slice())
    }

    pub fn len(&self) -> usize {
        self.times_fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_fs.is_empty()
    }
}

#[derive(Clone, Copy)]
enum Stage {
    /// Committed values at step `n`.
    Start,
    /// Predicted values at step `n + 1`.
    End,
}

/// Integrator state.
#[derive(Debug, Clone)]
pub struct Engine {
    eqs: CompiledEquations,
    h: f64,
    k: usize,
    n: usize,
    sys: Vec<Complex64>,
    sys_pred: Vec<Complex64>,
    sys_grad: Vec<Complex64>,
    sys_factor: Vec<Complex64>,
    band: BandBuffer,
    band_factor: Vec<Complex64>,
    band_pred: Vec<Complex64>,
    band_grad: Vec<Complex64>,
    certificate: f64,
}

impl Engine {
    /// Compiles `eqs`, sets the initial system values and opens line 0.
    pub fn new(eqs: &EquationSet, init: &[(&str, Complex64)], cfg: &RunConfig) -> Result<Self, EngineError> {
        let filtered;
        let eqs = if cfg.drop_noncontributing {
            filtered = eqs.without_first_arg_delayed();
            &filtered
        } else {
            eqs
        };
        let compiled = compile(eqs)?;
        let h = cfg.step_fs;
        if !(cfg.t_end_fs.is_finite() && cfg.t_end_fs >= 0.0) {
            return Err(EngineError::BadEndTime(cfg.t_end_fs));
        }
        let k = delay_steps(compiled.delay_fs, h)?;
        let steps = cfg.steps();

        let width = match cfg.band_width {
            BandWidth::Fixed(w) => w,
            BandWidth::Auto { epsilon } => {
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return Err(EngineError::BadEpsilon(epsilon));
                }
                let slowest = compiled.band_decay.iter().map(|l| -l.re).fold(f64::INFINITY, f64::min);
                // Offsets beyond the delay never feed back into offsets at
                // or below it, so a band of width `k` is already exact.
                auto_band_width(epsilon, slowest, h).min(k)
            }
        };
        let width = width.min(steps.max(1)).max(1);

        let mut sys = vec![ZERO; compiled.system_names.len()];
        for (name, value) in init {
            let idx = compiled
                .system_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| EngineError::UnknownInitialVar(name.to_string()))?;
            sys[idx] = *value;
        }

        let band = BandBuffer::new(compiled.band_names.len(), width, k)?;
        let slots = band.vars() * band.lines();
        let factor = |rates: &[Complex64]| rates.iter().map(|l| (l * h).exp()).collect::<Vec<_>>();
        let mut engine = Self {
            sys_factor: factor(&compiled.system_decay),
            band_factor: factor(&compiled.band_decay),
            sys_pred: vec![ZERO; sys.len()],
            sys_grad: vec![ZERO; sys.len()],
            band_pred: vec![ZERO; slots],
            band_grad: vec![ZERO; slots],
            sys,
            band,
            eqs: compiled,
            h,
            k,
            n: 0,
            certificate: 0.0,
        };
        engine.open_line(0);
        Ok(engine)
    }

    pub fn step_index(&self) -> usize {
        self.n
    }

    pub fn time_fs(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn system_names(&self) -> &[String] {
        &self.eqs.system_names
    }

    pub fn band_names(&self) -> &[String] {
        &self.eqs.band_names
    }

    pub fn system_values(&self) -> &[Complex64] {
        &self.sys
    }

    pub fn band_width(&self) -> usize {
        self.band.width()
    }

    pub fn delay_steps(&self) -> usize {
        self.k
    }

    /// `b_var(t_i, t_j)` as the engine sees it: exactly zero for `i < j`,
    /// `j < 0` or beyond the band width; `None` if the value is in the future
    /// or has already been discarded.
    pub fn band_value(&self, var: &str, i: i64, j: i64) -> Option<Complex64> {
        let v = self.eqs.band_names.iter().position(|n| n == var)?;
        if i > self.n as i64 {
            return None;
        }
        if j < 0 || i < j || (i - j) as usize > self.band.width() {
            return Some(ZERO);
        }
        if self.band.retains(i as usize, j as usize, self.n) {
            Some(self.band.get(v, i, j))
        } else {
            None
        }
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            truncation_certificate: self.certificate,
            band_width: self.band.width(),
            delay_steps: self.k,
            step_fs: self.h,
            steps: self.n,
        }
    }

    #[inline]
    fn pred_slot(&self, var: usize, line: usize) -> usize {
        var * self.band.lines() + line % self.band.lines()
    }

    /// Band value on the delayed diagonal as read by the system equations.
    fn diagonal(&self, var: usize, stage: Stage) -> Complex64 {
        let (n, k) = (self.n as i64, self.k as i64);
        match stage {
            Stage::Start => self.band.get(var, n, n - k),
            Stage::End => {
                let line = n + 1 - k;
                // Line 0 switches on at the end of this step; the corrector
                // takes the limit from the left. Otherwise the line was
                // advanced this step only if its offset was below the width.
                if line <= 0 || self.k > self.band.width() {
                    ZERO
                } else {
                    self.band_pred[self.pred_slot(var, line as usize)]
                }
            }
        }
    }

    fn system_rhs(&self, var: usize, stage: Stage) -> Complex64 {
        let mut acc = ZERO;
        for term in &self.eqs.system_terms[var] {
            let src = term.source;
            let value = match src.pattern {
                TimePattern::Current => match stage {
                    Stage::Start => self.sys[src.index],
                    Stage::End => self.sys_pred[src.index],
                },
                TimePattern::Diagonal => self.diagonal(src.index, stage),
                _ => unreachable!("rejected by validation"),
            };
            acc += term.rate * if src.conjugate { value.conj() } else { value };
        }
        acc
    }

    fn band_rhs(&self, terms: &[CompiledTerm], line: usize, stage: Stage) -> Complex64 {
        let j = line as i64;
        let i = match stage {
            Stage::Start => self.n as i64,
            Stage::End => self.n as i64 + 1,
        };
        let delayed = i - self.k as i64;
        let mut acc = ZERO;
        for term in terms {
            let src = term.source;
            let value = match src.pattern {
                TimePattern::Own => match stage {
                    Stage::Start => self.band.get(src.index, i, j),
                    Stage::End => self.band_pred[self.pred_slot(src.index, line)],
                },
                TimePattern::SecondArgDelayed => match stage {
                    Stage::End if delayed == 0 => ZERO,
                    _ => self.band.get(src.index, j, delayed),
                },
                // Strictly past the diagonal; the diagonal itself is the
                // SecondArgDelayed read.
                TimePattern::FirstArgDelayed if delayed > j => self.band.get(src.index, delayed, j),
                TimePattern::FirstArgDelayed => ZERO,
                _ => unreachable!("rejected by validation"),
            };
            acc += term.rate * if src.conjugate { value.conj() } else { value };
        }
        acc
    }

    /// Writes the diagonal value of every band variable on line `line`.
    fn open_line(&mut self, line: usize) {
        for v in 0..self.eqs.band_names.len() {
            let src = self.eqs.sources[v];
            let mut value = if src.derivative {
                self.sys_factor_rate(src.system) * self.sys[src.system] + self.system_rhs(src.system, Stage::Start)
            } else {
                self.sys[src.system]
            };
            if src.conjugate {
                value = value.conj();
            }
            self.band.set(v, line, line, src.coefficient * value);
        }
    }

    fn sys_factor_rate(&self, var: usize) -> Complex64 {
        self.eqs.system_decay[var]
    }

    fn active_lines(&self) -> std::ops::RangeInclusive<usize> {
        (self.n + 1).saturating_sub(self.band.width())..=self.n
    }

    /// Advances from step `n` to `n + 1`.
    pub fn step(&mut self) -> Result<(), EngineError> {
        let h = self.h;
        let n = self.n;
        let nb = self.eqs.band_names.len();

        for s in 0..self.sys.len() {
            let g = self.system_rhs(s, Stage::Start);
            self.sys_grad[s] = g;
            self.sys_pred[s] = self.sys_factor[s] * (self.sys[s] + h * g);
        }
        for j in self.active_lines() {
            for v in 0..nb {
                let g = self.band_rhs(&self.eqs.band_terms[v], j, Stage::Start);
                let slot = self.pred_slot(v, j);
                self.band_grad[slot] = g;
                self.band_pred[slot] = self.band_factor[v] * (self.band.get(v, n as i64, j as i64) + h * g);
            }
        }

        // Corrector. Band writes go to index n + 1, whose ring slot is never
        // read during this stage.
        let mut sys_new = Vec::with_capacity(self.sys.len());
        for s in 0..self.sys.len() {
            let g = self.system_rhs(s, Stage::End);
            let e = self.sys_factor[s];
            sys_new.push(e * self.sys[s] + 0.5 * h * (e * self.sys_grad[s] + g));
        }
        let edge = (n + 1).checked_sub(self.band.width());
        for j in self.active_lines() {
            for v in 0..nb {
                let g = self.band_rhs(&self.eqs.band_terms[v], j, Stage::End);
                let slot = self.pred_slot(v, j);
                let e = self.band_factor[v];
                let value = e * self.band.get(v, n as i64, j as i64) + 0.5 * h * (e * self.band_grad[slot] + g);
                if Some(j) == edge && self.band.width() < self.k {
                    self.certificate = self.certificate.max(value.norm());
                }
                self.band.set(v, n + 1, j, value);
            }
        }

        if let Some(bad) = sys_new.iter().position(|v| !v.is_finite()) {
            return Err(EngineError::NonFinite {
                step: n + 1,
                var: self.eqs.system_names[bad].clone(),
            });
        }
        self.sys = sys_new;
        self.n = n + 1;
        self.open_line(n + 1);
        Ok(())
    }
}

/// Integrates `eqs` from `init` up to `cfg.t_end_fs`.
pub fn run(eqs: &EquationSet, init: &[(&str, Complex64)], cfg: &RunConfig) -> Result<Trajectory, EngineError> {
    let mut engine = Engine::new(eqs, init, cfg)?;
    let steps = cfg.steps();
    let names = engine.system_names().to_vec();
    let mut values: Vec<Vec<Complex64>> = engine
        .system_values()
        .iter()
        .map(|&v| {
            let mut series = Vec::with_capacity(steps + 1);
            series.push(v);
            series
        })
        .collect();
    let mut times_fs = Vec::with_capacity(steps + 1);
    times_fs.push(0.0);
    for _ in 0..steps {
        engine.step()?;
        times_fs.push(engine.time_fs());
        for (series, &v) in values.iter_mut().zip(engine.system_values()) {
            series.push(v);
        }
    }
    Ok(Trajectory {
        times_fs,
        names,
        values,
        diagnostics: engine.diagnostics(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::HBAR_EV_FS;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// One system variable fed back through a single band variable.
    fn feedback(decay_ev: f64, coupling_ev: f64, delay_fs: f64) -> EquationSet {
        let mut eqs = EquationSet::new("feedback", delay_fs);
        eqs.system_var("p").band_var("x");
        eqs.term("p", c(-decay_ev, 0.0), Reference::new("p", TimePattern::Current))
            .term("p", c(-coupling_ev, 0.0), Reference::new("x", TimePattern::Diagonal))
            .term("x", c(-decay_ev, 0.0), Reference::new("x", TimePattern::Own))
            .source("x", c(1.0, 0.0), "p", false);
        eqs
    }

    #[test]
    fn zero_end_time_returns_initial_values() {
        let eqs = feedback(0.01, 0.005, 100.0);
        let traj = run(&eqs, &[("p", c(0.3, 0.1))], &RunConfig::new(1.0, 0.0)).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.series("p").unwrap(), &[c(0.3, 0.1)]);
    }

    #[test]
    fn step_must_divide_delay() {
        let eqs = feedback(0.01, 0.005, 100.0);
        let err = Engine::new(&eqs, &[], &RunConfig::new(3.0, 10.0)).unwrap_err();
        assert!(matches!(err, EngineError::StepDoesNotDivideDelay { .. }));
        assert!(Engine::new(&eqs, &[], &RunConfig::new(0.0, 10.0)).is_err());
        assert!(Engine::new(&eqs, &[], &RunConfig::new(1.0, -1.0)).is_err());
    }

    #[test]
    fn unknown_initial_variable_rejected() {
        let eqs = feedback(0.01, 0.005, 100.0);
        assert!(matches!(
            Engine::new(&eqs, &[("q", c(1.0, 0.0))], &RunConfig::new(1.0, 10.0)),
            Err(EngineError::UnknownInitialVar(_))
        ));
    }

    #[test]
    fn uncoupled_decay_is_exact() {
        let gamma = 0.02;
        let eqs = feedback(gamma, 0.0, 50.0);
        let traj = run(&eqs, &[("p", c(1.0, 0.0))], &RunConfig::new(0.5, 500.0)).unwrap();
        for (t, p) in traj.times_fs.iter().zip(traj.series("p").unwrap()) {
            let exact = (-gamma * t / HBAR_EV_FS).exp();
            assert!((p.re - exact).abs() < 1e-13 && p.im == 0.0);
        }
    }

    /// With x(t, t₁) = e^{−γ(t−t₁)} p(t₁), p obeys
    /// p' = −γ p − c e^{−γτ} p(t − τ), which a fine explicit Euler run resolves.
    #[test]
    fn feedback_matches_reduced_delay_equation() {
        let (gamma, coupling, tau) = (0.004, 0.01, 80.0);
        let eqs = feedback(gamma, coupling, tau);
        let h = 0.5;
        let traj = run(&eqs, &[("p", c(1.0, 0.0))], &RunConfig::new(h, 400.0)).unwrap();

        let fine = 200;
        let hf = h / fine as f64;
        let (g, cpl) = (gamma / HBAR_EV_FS, coupling / HBAR_EV_FS);
        let damp = (-g * tau).exp();
        let kf = (tau / hf).round() as usize;
        let total = (400.0 / hf).round() as usize;
        let mut p = vec![1.0f64; total + 1];
        for m in 0..total {
            let delayed = if m >= kf { p[m - kf] } else { 0.0 };
            p[m + 1] = p[m] + hf * (-g * p[m] - cpl * damp * delayed);
        }
        let series = traj.series("p").unwrap();
        for (n, v) in series.iter().enumerate() {
            assert!(
                (v.re - p[n * fine]).abs() < 2e-4,
                "step {n}: {} vs {}",
                v.re,
                p[n * fine]
            );
        }
    }

    #[test]
    fn causality_of_band_reads() {
        let eqs = feedback(0.01, 0.005, 20.0);
        let mut engine = Engine::new(&eqs, &[("p", c(1.0, 0.0))], &RunConfig::new(1.0, 200.0)).unwrap();
        for _ in 0..100 {
            engine.step().unwrap();
            let n = engine.step_index() as i64;
            for j in 0..=n {
                for i in (j - 5).max(0)..j {
                    assert_eq!(engine.band_value("x", i, j), Some(ZERO));
                }
            }
            assert_eq!(engine.band_value("x", n, -1), Some(ZERO));
            assert_eq!(engine.band_value("x", n + 1, n), None);
        }
    }

    #[test]
    fn band_width_caps() {
        let eqs = feedback(0.001, 0.0, 10.0);
        let fixed = RunConfig::new(1.0, 30.0).with_band_width(BandWidth::Fixed(100));
        assert_eq!(Engine::new(&eqs, &[], &fixed).unwrap().band_width(), 30);
        // A slow decay leaves the delay as the limit.
        let slow = RunConfig::new(1.0, 3000.0).with_band_width(BandWidth::Auto { epsilon: 0.5 });
        assert_eq!(Engine::new(&eqs, &[], &slow).unwrap().band_width(), 10);
        // A fast one truncates below it.
        let eqs = feedback(0.2, 0.0, 50.0);
        let engine = Engine::new(&eqs, &[], &slow).unwrap();
        let expected = auto_band_width(0.5, 0.2 / HBAR_EV_FS, 1.0);
        assert!(expected < 50);
        assert_eq!(engine.band_width(), expected);
    }

    #[test]
    fn certificate_vanishes_when_band_covers_delay() {
        let eqs = feedback(0.01, 0.005, 20.0);
        let traj = run(&eqs, &[("p", c(1.0, 0.0))], &RunConfig::new(1.0, 200.0)).unwrap();
        assert_eq!(traj.diagnostics.band_width, 20);
        assert_eq!(traj.diagnostics.truncation_certificate, 0.0);
        let narrow = RunConfig::new(1.0, 200.0).with_band_width(BandWidth::Fixed(5));
        let traj = run(&eqs, &[("p", c(1.0, 0.0))], &narrow).unwrap();
        assert!(traj.diagnostics.truncation_certificate > 0.0);
    }

    #[test]
    fn auto_width_formula() {
        assert_eq!(auto_band_width(1e-12, 0.0, 1.0), usize::MAX);
        let w = auto_band_width(1e-12, 0.1, 0.5);
        assert_eq!(w, ((1e12f64).ln() / 0.05).ceil() as usize);
    }

    #[test]
    fn runs_are_deterministic() {
        let eqs = feedback(0.01, 0.008, 30.0);
        let cfg = RunConfig::new(0.5, 300.0);
        let a = run(&eqs, &[("p", c(1.0, 0.0))], &cfg).unwrap();
        let b = run(&eqs, &[("p", c(1.0, 0.0))], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_values_abort_with_step() {
        let eqs = feedback(-1e3, 0.0, 10.0);
        let err = run(&eqs, &[("p", c(1.0, 0.0))], &RunConfig::new(1.0, 1000.0)).unwrap_err();
        assert!(matches!(err, EngineError::NonFinite { .. }), "{err}");
    }

    #[test]
    fn derivative_source_uses_rhs() {
        let gamma = 0.02;
        let mut eqs = feedback(gamma, 0.0, 10.0);
        eqs.sources[0].derivative = true;
        let engine = Engine::new(&eqs, &[("p", c(2.0, 0.0))], &RunConfig::new(1.0, 10.0)).unwrap();
        let expected = -gamma / HBAR_EV_FS * 2.0;
        assert!((engine.band_value("x", 0, 0).unwrap().re - expected).abs() < 1e-15);
    }
}
