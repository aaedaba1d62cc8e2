use std::path::PathBuf;

use thiserror::Error;

use cislunar_core::linkselect::SimError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Validation(String),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("simulation failed: {0}")]
    Simulation(#[from] SimError),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 usage, 2 scenario parse/validation, 3 runtime or I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Scenario(ScenarioError::Io { .. }) => 3,
            CliError::Scenario(_) => 2,
            CliError::Simulation(_) | CliError::Output { .. } => 3,
        }
    }
}
