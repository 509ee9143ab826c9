//! Batch front end for the `fracbessel` solver: configuration, solution
//! output and the property suites behind `fracbessel check`.

pub mod config;
pub mod output;
pub mod run;
pub mod suites;

use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_RESONANCE: i32 = 2;
pub const EXIT_ML: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] fracbessel::Error),

    #[error("cannot write {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fracbessel::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Solver(E::Resonance { .. }) => EXIT_RESONANCE,
            CliError::Solver(E::MlNonConvergence { .. }) => EXIT_ML,
            CliError::Solver(E::InvalidProblem(_) | E::Domain { .. }) => EXIT_CONFIG,
            CliError::Solver(E::ZeroBracket { .. } | E::Internal(_)) => EXIT_CHECK_FAILED,
        }
    }
}
