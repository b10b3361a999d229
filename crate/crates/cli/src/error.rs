use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sstml::Error),

    #[error("cannot parse {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{failed} of {total} runs failed; see the manifest")]
    RunsFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config { .. } => "invalid-config",
            CliError::Usage(_) => "usage",
            CliError::RunsFailed { .. } => "runs-failed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config { .. } | CliError::Core(sstml::Error::InvalidConfig(_)) => 3,
            CliError::Core(sstml::Error::Io { .. }) => 4,
            CliError::RunsFailed { .. } => 5,
            CliError::Core(_) => 1,
        }
    }

    pub fn invalid_config(message: impl Into<String>) -> Self {
        CliError::Core(sstml::Error::InvalidConfig(message.into()))
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
    CliError::Core(sstml::Error::io(path, source))
}
