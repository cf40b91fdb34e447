use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{BandWidth, RunConfig, DEFAULT_BAND_EPSILON};
use crate::models::TwoPhotonSource;
use crate::qnm::{derive_cavity_params, CavityParams, FrequencyConvention, QnmError, SlabParams};

pub const MIN_STEPS_PER_DELAY: u32 = 10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),
    #[error("at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Params(#[from] QnmError),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Single,
    Twophoton,
    Wavefunction,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Single => "single",
            ModelKind::Twophoton => "twophoton",
            ModelKind::Wavefunction => "wavefunction",
        }
    }

    /// Output variables in column order.
    pub fn variables(self) -> &'static [&'static str] {
        match self {
            ModelKind::Single => &crate::models::SINGLE_SYSTEM_VARS,
            ModelKind::Twophoton => &crate::models::TWO_PHOTON_SYSTEM_VARS,
            ModelKind::Wavefunction => &["n_a", "n_b"],
        }
    }
}

/// A number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabConfig {
    pub length_um: f64,
    pub eps_slab: f64,
    pub eps_background: f64,
    pub separation_um: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub mode_index: u32,
    #[serde(default)]
    pub convention: FrequencyConvention,
}

fn one() -> u32 {
    1
}

fn is_one(v: &u32) -> bool {
    *v == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub omega_ev: [f64; 2],
    pub gamma_ev: [f64; 2],
    /// `V_μη` in eV, row `μ`, column `η`.
    pub coupling_ev: [[ComplexValue; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_fs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_fs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_delay: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_fs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_delays: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub band_epsilon: f64,
    /// Overrides `band_epsilon` with a fixed number of steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_width: Option<usize>,
    #[serde(default)]
    pub drop_noncontributing: bool,
    #[serde(default)]
    pub literal_two_photon_source: bool,
}

fn default_epsilon() -> f64 {
    DEFAULT_BAND_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Preset(String),
    Explicit(BTreeMap<String, ComplexValue>),
}

/// Simulation configuration as written in a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab: Option<SlabConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityConfig>,
    pub numerics: NumericsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Everything a run needs, with units resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub model: ModelKind,
    pub params: CavityParams,
    pub convention: Option<FrequencyConvention>,
    pub run: RunConfig,
    pub two_photon_source: TwoPhotonSource,
    pub initial: Vec<(String, Complex64)>,
}

impl ResolvedConfig {
    pub fn initial_refs(&self) -> Vec<(&str, Complex64)> {
        self.initial.iter().map(|(n, v)| (n.as_str(), *v)).collect()
    }

    /// Wave-function amplitudes `[N_A, N_B]` for the oracle.
    pub fn initial_amplitudes(&self) -> [Complex64; 2] {
        let mut amps = [Complex64::new(0.0, 0.0); 2];
        for (name, v) in &self.initial {
            match name.as_str() {
                "n_a" => amps[0] = *v,
                "n_b" => amps[1] = *v,
                _ => {}
            }
        }
        amps
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    if let serde_json::Value::Object(map) = &value {
        let mut missing = Vec::new();
        if !map.contains_key("slab") && !map.contains_key("cavity") {
            missing.push("slab or cavity".to_string());
        }
        if !map.contains_key("numerics") {
            missing.push("numerics".to_string());
        }
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys(missing));
        }
    }
    let config: SimConfig = serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    config.resolve()?;
    Ok(config)
}

/// Pretty JSON that [`parse_config`] reads back to the same value.
pub fn emit_config(config: &SimConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config serialises");
    text.push('\n');
    text
}

fn exactly_one<T: Copy>(a: Option<T>, b: Option<T>, what: &str) -> Result<Either<T>, ConfigError> {
    match (a, b) {
        (Some(x), None) => Ok(Either::First(x)),
        (None, Some(y)) => Ok(Either::Second(y)),
        (Some(_), Some(_)) => Err(invalid(format!("give only one of {what}"))),
        (None, None) => Err(invalid(format!("one of {what} is required"))),
    }
}

enum Either<T> {
    First(T),
    Second(T),
}

fn positive(value: f64, key: &str) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(format!("{key} must be positive and finite, got {value}")))
    }
}

impl SimConfig {
    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        let (params, convention) = match (&self.slab, &self.cavity) {
            (Some(_), Some(_)) => return Err(invalid("give exactly one of `slab` and `cavity`, not both")),
            (None, None) => return Err(ConfigError::MissingKeys(vec!["slab or cavity".into()])),
            (Some(s), None) => {
                let slab = SlabParams::new(s.length_um, s.eps_slab, s.eps_background, s.separation_um)?
                    .with_mode_index(s.mode_index)?;
                (derive_cavity_params(&slab, s.convention)?, Some(s.convention))
            }
            (None, Some(c)) => {
                let tau_fs = match exactly_one(c.tau_ps, c.tau_fs, "`cavity.tau_ps` and `cavity.tau_fs`")? {
                    Either::First(ps) => 1000.0 * ps,
                    Either::Second(fs) => fs,
                };
                let coupling = c.coupling_ev.map(|row| row.map(ComplexValue::value));
                let params = CavityParams {
                    omega_ev: c.omega_ev,
                    gamma_ev: c.gamma_ev,
                    coupling_ev: coupling,
                    tau_fs,
                };
                params.validate()?;
                (params, None)
            }
        };
        let tau = positive(params.tau_fs, "the delay")?;

        let n = &self.numerics;
        let step_fs = match exactly_one(
            n.h_fs,
            n.steps_per_delay.map(f64::from),
            "`numerics.h_fs` and `numerics.steps_per_delay`",
        )? {
            Either::First(h) => positive(h, "numerics.h_fs")?,
            Either::Second(k) => {
                if k < f64::from(MIN_STEPS_PER_DELAY) {
                    return Err(invalid(format!(
                        "numerics.steps_per_delay must be at least {MIN_STEPS_PER_DELAY}, got {k}"
                    )));
                }
                tau / k
            }
        };
        let k = (tau / step_fs).round();
        if k < MIN_STEPS_PER_DELAY as f64 {
            return Err(invalid(format!(
                "the step must resolve the delay with at least {MIN_STEPS_PER_DELAY} steps, got {}",
                tau / step_fs
            )));
        }
        if ((tau / step_fs) - k).abs() > 1e-9 * k {
            return Err(invalid(format!(
                "numerics.h_fs = {step_fs} fs does not divide the delay {tau} fs"
            )));
        }
        let t_end_fs = match exactly_one(
            n.t_end_fs,
            n.t_end_delays,
            "`numerics.t_end_fs` and `numerics.t_end_delays`",
        )? {
            Either::First(fs) => positive(fs, "numerics.t_end_fs")?,
            Either::Second(d) => positive(d, "numerics.t_end_delays")? * tau,
        };
        if !(n.band_epsilon > 0.0 && n.band_epsilon < 1.0) {
            return Err(invalid(format!(
                "numerics.band_epsilon must lie in (0, 1), got {}",
                n.band_epsilon
            )));
        }
        let band_width = match n.band_width {
            Some(0) => return Err(invalid("numerics.band_width must be at least 1")),
            Some(w) => BandWidth::Fixed(w),
            None => BandWidth::Auto {
                epsilon: n.band_epsilon,
            },
        };
        let run = RunConfig::new(step_fs, t_end_fs)
            .with_band_width(band_width)
            .with_drop_noncontributing(n.drop_noncontributing);

        let initial = self.resolve_initial()?;
        Ok(ResolvedConfig {
            model: self.model,
            params,
            convention,
            run,
            two_photon_source: if n.literal_two_photon_source {
                TwoPhotonSource::Derivative
            } else {
                TwoPhotonSource::Value
            },
            initial,
        })
    }

    fn resolve_initial(&self) -> Result<Vec<(String, Complex64)>, ConfigError> {
        let one = Complex64::new(1.0, 0.0);
        let vars = self.model.variables();
        match &self.initial_state {
            None => Ok(vec![(default_preset_var(self.model).to_string(), one)]),
            Some(InitialState::Preset(name)) => {
                let var = preset_var(self.model, name).ok_or_else(|| {
                    invalid(format!(
                        "unknown initial_state preset `{name}` for model `{}`; expected one of {}",
                        self.model.as_str(),
                        presets(self.model)
                            .iter()
                            .map(|(p, _)| *p)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
                Ok(vec![(var.to_string(), one)])
            }
            Some(InitialState::Explicit(map)) => map
                .iter()
                .map(|(name, v)| {
                    if vars.contains(&name.as_str()) {
                        Ok((name.clone(), v.value()))
                    } else {
                        Err(ConfigError::Schema {
                            path: format!("initial_state.{name}"),
                            message: format!("not a variable of model `{}`", self.model.as_str()),
                        })
                    }
                })
                .collect(),
        }
    }
}

fn presets(model: ModelKind) -> &'static [(&'static str, &'static str)] {
    match model {
        ModelKind::Single => &[("excited_a", "p_a"), ("excited_b", "p_b")],
        ModelKind::Wavefunction => &[("excited_a", "n_a"), ("excited_b", "n_b")],
        ModelKind::Twophoton => &[("pair_a", "c20"), ("pair_b", "c02"), ("split", "c11")],
    }
}

fn preset_var(model: ModelKind, name: &str) -> Option<&'static str> {
    presets(model).iter().find(|(p, _)| *p == name).map(|(_, v)| *v)
}

fn default_preset_var(model: ModelKind) -> &'static str {
    presets(model)[0].1
}
