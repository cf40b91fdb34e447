use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use super::config::{parse_config, ConfigError, ModelKind, ResolvedConfig, SimConfig};
use super::output::{write_outputs, Table};
use crate::engine::{run, EngineError, Trajectory};
use crate::models::{build_single_excitation, build_two_photon, pure_state_crosscheck, CrosscheckReport, ModelError};
use crate::oracle::{run_wavefunction_from, OracleError, WaveTrajectory};
use crate::qnm::{derive_cavity_params, overlaps, qnm_frequency, FrequencyConvention, QnmError, SlabParams};

/// Default pass threshold of `compare`.
pub const DEFAULT_TOLERANCE: f64 = 5e-3;

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CommandError {
    /// Process exit code: 1 for usage and configuration problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<EngineError> for CommandError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::NonFinite { .. } | EngineError::StorageTooLarge { .. } => {
                CommandError::Numerical(e.to_string())
            }
            other => CommandError::Config(ConfigError::Invalid(other.to_string())),
        }
    }
}

impl From<ModelError> for CommandError {
    fn from(e: ModelError) -> Self {
        CommandError::Config(ConfigError::Invalid(e.to_string()))
    }
}

impl From<OracleError> for CommandError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::NonFinite(_) => CommandError::Numerical(e.to_string()),
            OracleError::Grid(inner) => inner.into(),
            other => CommandError::Config(ConfigError::Invalid(other.to_string())),
        }
    }
}

impl From<QnmError> for CommandError {
    fn from(e: QnmError) -> Self {
        CommandError::Config(ConfigError::Params(e))
    }
}

pub fn load_config(path: &Path) -> Result<SimConfig, CommandError> {
    let text = fs::read_to_string(path).map_err(|e| CommandError::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

/// System-variable series of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub times_fs: Vec<f64>,
    pub names: Vec<String>,
    pub values: Vec<Vec<Complex64>>,
    pub truncation_certificate: Option<f64>,
    pub band_width: Option<usize>,
}

impl From<Trajectory> for Series {
    fn from(t: Trajectory) -> Self {
        Series {
            times_fs: t.times_fs,
            names: t.names,
            values: t.values,
            truncation_certificate: Some(t.diagnostics.truncation_certificate),
            band_width: Some(t.diagnostics.band_width),
        }
    }
}

impl From<WaveTrajectory> for Series {
    fn from(w: WaveTrajectory) -> Self {
        Series {
            times_fs: w.times_fs,
            names: vec!["n_a".into(), "n_b".into()],
            values: vec![w.n_a, w.n_b],
            truncation_certificate: None,
            band_width: None,
        }
    }
}

impl Series {
    pub fn table(&self) -> Table<'_> {
        Table {
            times_fs: &self.times_fs,
            names: self.names.clone(),
            columns: self.values.iter().map(Vec::as_slice).collect(),
        }
    }

    pub fn series(&self, name: &str) -> Option<&[Complex64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.values[k].as_slice())
    }
}

/// Runs the configured model.
pub fn run_model(resolved: &ResolvedConfig) -> Result<Series, CommandError> {
    let r = resolved;
    Ok(match r.model {
        ModelKind::Single => run(&build_single_excitation(&r.params)?, &r.initial_refs(), &r.run)?.into(),
        ModelKind::Twophoton => run(
            &build_two_photon(&r.params, r.two_photon_source)?,
            &r.initial_refs(),
            &r.run,
        )?
        .into(),
        ModelKind::Wavefunction => {
            run_wavefunction_from(&r.params, r.initial_amplitudes(), r.run.step_fs, r.run.t_end_fs)?.into()
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: String,
    pub model: ModelKind,
    pub config: SimConfig,
    pub resolved: serde_json::Value,
    pub conventions: serde_json::Value,
    pub diagnostics: serde_json::Value,
}

fn resolved_json(r: &ResolvedConfig) -> serde_json::Value {
    json!({
        "omega_ev": r.params.omega_ev,
        "gamma_ev": r.params.gamma_ev,
        "coupling_ev": r.params.coupling_ev,
        "tau_fs": r.params.tau_fs,
        "step_fs": r.run.step_fs,
        "t_end_fs": r.run.t_end_fs,
        "steps": r.run.steps(),
        "delay_steps": (r.params.tau_fs / r.run.step_fs).round(),
        "initial_state": r.initial.iter().map(|(n, v)| (n.clone(), [v.re, v.im])).collect::<std::collections::BTreeMap<_, _>>(),
    })
}

fn conventions_json(r: &ResolvedConfig) -> serde_json::Value {
    json!({
        "units": {"energy": "eV", "time": "fs", "length": "um"},
        "frame": "rotating at the mean cavity energy",
        "transfer_phase": "+i*omega*tau/hbar",
        "frequency_convention": r.convention,
        "two_photon_source": r.two_photon_source,
        "drop_noncontributing": r.run.drop_noncontributing,
        "band_width": r.run.band_width,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub out: PathBuf,
    pub rows: usize,
    pub truncation_certificate: Option<f64>,
}

/// Runs `config` and writes `out` plus its `.meta.json` sidecar.
pub fn simulate(config: &SimConfig, out: &Path) -> Result<SimulateSummary, CommandError> {
    let resolved = config.resolve()?;
    let started = Instant::now();
    let series = run_model(&resolved)?;
    let wall = started.elapsed().as_secs_f64();
    let csv = series.table().to_csv();
    let meta = Meta {
        version: version_string(),
        model: resolved.model,
        config: config.clone(),
        resolved: resolved_json(&resolved),
        conventions: conventions_json(&resolved),
        diagnostics: json!({
            "truncation_certificate": series.truncation_certificate,
            "band_width_steps": series.band_width,
            "wall_time_s": wall,
        }),
    };
    write_outputs(out, &csv, &meta).map_err(|e| CommandError::Io(format!("{}: {e}", out.display())))?;
    Ok(SimulateSummary {
        out: out.to_path_buf(),
        rows: series.times_fs.len(),
        truncation_certificate: series.truncation_certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    #[serde(flatten)]
    pub deviations: CrosscheckReport,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub step_fs: f64,
    pub steps: usize,
    pub truncation_certificate: f64,
}

/// Runs the density-matrix model and the wave-function oracle on the same
/// grid and compares them.
pub fn compare(config: &SimConfig, tolerance: f64) -> Result<CompareReport, CommandError> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(CommandError::Usage(format!(
            "tolerance must be a non-negative number, got {tolerance}"
        )));
    }
    let resolved = config.resolve()?;
    if resolved.model != ModelKind::Single {
        return Err(ConfigError::Invalid(format!(
            "compare needs model `single`, got `{}`",
            resolved.model.as_str()
        ))
        .into());
    }
    let initial = resolved.initial_refs();
    let pure = initial
        .iter()
        .all(|(name, v)| name == &"p_a" && *v == Complex64::new(1.0, 0.0));
    if !pure {
        return Err(ConfigError::Invalid("compare needs the `excited_a` initial state".into()).into());
    }
    let eqs = build_single_excitation(&resolved.params)?;
    let (heom, wave) = std::thread::scope(|s| {
        let heom = s.spawn(|| run(&eqs, &initial, &resolved.run));
        let wave = s.spawn(|| {
            run_wavefunction_from(
                &resolved.params,
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                resolved.run.step_fs,
                resolved.run.t_end_fs,
            )
        });
        (heom.join().expect("solver thread"), wave.join().expect("oracle thread"))
    });
    let (heom, wave) = (heom?, wave?);
    let deviations = pure_state_crosscheck(&heom, &wave)?;
    let max_deviation = deviations.max();
    Ok(CompareReport {
        deviations,
        max_deviation,
        tolerance,
        pass: max_deviation <= tolerance,
        step_fs: heom.diagnostics.step_fs,
        steps: heom.diagnostics.steps,
        truncation_certificate: heom.diagnostics.truncation_certificate,
    })
}

/// QNM summary for two identical slabs.
pub fn qnm_info(
    length_um: f64,
    eps_slab: f64,
    eps_background: f64,
    separation_um: f64,
) -> Result<serde_json::Value, CommandError> {
    let slab = SlabParams::new(length_um, eps_slab, eps_background, separation_um)?;
    let mut per_convention = serde_json::Map::new();
    let mut z = None;
    for conv in [FrequencyConvention::Cyclic, FrequencyConvention::Angular] {
        let f = qnm_frequency(&slab, conv)?;
        let p = derive_cavity_params(&slab, conv)?;
        z = Some(f.z);
        per_convention.insert(
            serde_json::to_value(conv)
                .expect("convention serialises")
                .as_str()
                .unwrap_or_default()
                .to_string(),
            json!({
                "omega_ev": f.omega_ev,
                "gamma_ev": f.gamma_ev,
                "coupling_ev": p.coupling_ev.map(|row| row.map(|v| v.re)),
            }),
        );
    }
    let z = z.expect("two conventions evaluated");
    let o = overlaps(&slab).map_err(|e| match e {
        QnmError::Lossless => CommandError::Numerical(e.to_string()),
        other => other.into(),
    })?;
    Ok(json!({
        "z": {"re": z.re, "im": z.im},
        "loss_ratio": -z.im / z.re,
        "conventions": per_convention,
        "tau_fs": slab.delay_fs(),
        "s_aa_um3": o.s_aa,
        "s_ab_um3": o.s_ab,
        "s_ab_over_s_aa": o.ratio(),
    }))
}
