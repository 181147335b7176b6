use std::path::PathBuf;

use coupled_core::Error as CoreError;

/// Everything that can stop a run, with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown table `{0}` (expected table1, table2 or table3)")]
    UnknownTable(String),
    #[error("infeasible model: {0}")]
    Infeasible(String),
    #[error("audit failed: {}", .0.join("; "))]
    Audit(Vec<String>),
    #[error("{0}")]
    Runtime(String),
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::UnknownTable(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Audit(_) => 4,
            CliError::Runtime(_) | CliError::Io { .. } => 1,
        }
    }
}

/// Library errors raised while building a model from a config.
pub(crate) fn from_build(e: CoreError) -> CliError {
    match e {
        CoreError::Infeasible(msg) => CliError::Infeasible(msg),
        other => CliError::Config(other.to_string()),
    }
}
