//! Config-driven front end: one subcommand per experiment, each writing
//! `<name>.report.json`, `<name>.csv` and `<name>.manifest` into the output directory.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::{cmd_chsh, cmd_cluster, cmd_mass_sweep, cmd_mermin, cmd_search, CommandOptions, RunOutput};
pub use verify::cmd_verify;

/// Caps the worker threads; unset means all cores.
pub const THREADS_ENV: &str = "DIAMOND_BELL_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("quadrature did not reach its error target; partial report at {}", .0.display())]
    NonConvergence(PathBuf),
    #[error("rejected by the causality filter ({status}); report at {}", .report.display())]
    FilterRejected { status: String, report: PathBuf },
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::FilterRejected { .. } => 4,
            CliError::Verification(_) | CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}
