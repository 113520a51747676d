//! Scenario configuration, experiment commands, and file output for the
//! `tactile` command-line runner.

pub mod commands;
pub mod output;
pub mod scenario;

use thiserror::Error;

/// Command errors, split by exit code: validation failures exit 1,
/// runtime failures exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}
