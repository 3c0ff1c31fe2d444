//! Command-line harness: run configuration files, experiment suites and
//! CSV output for reduced-model runs.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{format_config, parse_config, ConfigError};
pub use experiment::{run_experiment, ExperimentName, ExperimentSpec};
pub use output::{emit_csv, OutputError};
