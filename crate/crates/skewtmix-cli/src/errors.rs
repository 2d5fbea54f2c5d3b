//! CLI error type carrying the process exit code: 2 for input problems
//! (I/O, parsing, shape misuse), 3 for numerical or model failures during
//! fitting.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable files, malformed CSV/JSON, wrong shapes,
    /// invalid flag combinations. Exit code 2.
    Input(String),
    /// The computation itself failed: empty component, singular start,
    /// non-finite likelihood. Exit code 3.
    Numeric(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl From<skewtmix::Error> for CliError {
    fn from(e: skewtmix::Error) -> Self {
        use skewtmix::Error::*;
        match e {
            EmptyComponent { .. } | SingularStart(_) | NotPositiveDefinite | NonFinite(_)
            | DomainError(_) | DegenerateTruncation => CliError::Numeric(e.to_string()),
            DimensionMismatch(_) | InvalidParameter(_) | MismatchedModels(_) => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
