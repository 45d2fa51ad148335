use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] ldpcgi_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), reason: reason.into() }
    }

    /// Process exit status: 2 for configuration problems, 3 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => 3,
            CliError::Config(_) | CliError::Core(_) => 2,
        }
    }
}
