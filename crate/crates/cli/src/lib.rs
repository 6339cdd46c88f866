//! Batch front-end of `rotodiff-core`: scenario configuration, execution and result files.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{schema, ScenarioConfig, ScenarioKind};
pub use error::CliError;
pub use output::{emit_wigner_csv, format_f64, read_wigner_csv, Manifest};
pub use runner::{run_scenario, RunReport};
