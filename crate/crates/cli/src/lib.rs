//! Library side of the `dcapprox` command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{Experiment, ExperimentConfig, RawConfig};
pub use error::CliError;
pub use experiments::{run, Outcome, ResultRow};
