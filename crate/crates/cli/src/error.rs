use std::fmt;

/// Failure classes of the command-line tool, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("{failed} of {total} checks failed")]
    SuiteFailure { failed: usize, total: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Precision(_) => 2,
            CliError::SuiteFailure { .. } => 3,
        }
    }

    pub fn usage(e: impl fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn precision(e: impl fmt::Display) -> Self {
        CliError::Precision(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}
