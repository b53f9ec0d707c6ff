//! Experiment runner behind the `zdlab` binary.
//!
//! [`run`] executes one parsed command line and writes its report to any
//! writer, which is how the integration tests drive it.

pub mod commands;
pub mod config;
pub mod sweep;

pub use commands::{run, Cli, Command};

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, config or input files (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// The request is well-formed but no solution exists (exit 3).
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }

    pub(crate) fn io(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o: {e}"))
    }
}

impl From<zdlab::Error> for CliError {
    fn from(e: zdlab::Error) -> Self {
        use zdlab::Error as E;
        match e {
            _ if e.is_infeasibility() => CliError::Infeasible(e.to_string()),
            E::NoConvergence { .. } | E::Degenerate(_) | E::Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
