use std::path::PathBuf;

use layercast_core::Error as SolverError;

/// Failure of a CLI run, each kind mapped to its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("solver failure: {0}")]
    Solver(#[from] SolverError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("writing output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } | CliError::Output(_) => 1,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

/// Exit code for a `compare` run whose cross-checks did not all hold.
pub const EXIT_TOLERANCE_BREACH: i32 = 4;

/// Input validation errors from the core (bad power, bad bandwidth ratio,
/// malformed states) are flag errors, not solver failures.
pub(crate) fn invalid_input(e: SolverError) -> CliError {
    CliError::Usage(e.to_string())
}
