//! Command-line front end: JSON configuration, subcommands and CSV/JSON
//! artifact writers.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

/// Failure classes, mapped to process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

impl From<okpc::Error> for CliError {
    fn from(e: okpc::Error) -> Self {
        use okpc::Error as E;
        match e {
            E::Config(_) | E::InvalidParameter(_) | E::InvalidMesh(_) | E::TooLarge { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Solver(other.to_string()),
        }
    }
}
