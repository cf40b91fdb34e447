//! Configuration files, CSV output and the commands behind the `delay-heom`
//! binary.

mod commands;
mod config;
mod output;

pub use commands::{
    compare, load_config, qnm_info, run_model, simulate, version_string, CommandError, CompareReport, Meta, Series,
    SimulateSummary, DEFAULT_TOLERANCE,
};
pub use config::{
    emit_config, parse_config, CavityConfig, ComplexValue, ConfigError, InitialState, ModelKind, NumericsConfig,
    ResolvedConfig, SimConfig, SlabConfig, MIN_STEPS_PER_DELAY,
};
pub use output::{format_number, meta_path, parse_csv, write_outputs, Table};
