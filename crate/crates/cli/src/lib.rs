//! Config-driven experiments on coupled fixed-point market models.
//!
//! A TOML config names a model, starting points and a list of commands; each
//! command writes CSV or JSON artifacts into the output directory. Exit
//! codes: 0 success, 2 invalid config or unknown table, 3 infeasible model,
//! 4 failed audit, 1 anything else.

pub mod config;
mod error;
pub mod runner;
pub mod tables;

pub use config::{Command, ExperimentConfig, ModelConfig};
pub use error::CliError;
pub use runner::{run, RunOptions, RunOutcome, Scope};
pub use tables::{reproduce_table, TableName};
