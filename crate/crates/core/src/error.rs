use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("shape error: expected {expected:?}, got {actual:?}")]
    Shape {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("degenerate batch: every class weight is zero")]
    DegenerateBatch,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidInput(_) => "invalid-input",
            Error::OutOfRange { .. } => "out-of-range",
            Error::Io { .. } => "io-error",
            Error::Parse { .. } => "parse-error",
            Error::Layout(_) => "layout-error",
            Error::Shape { .. } => "shape-error",
            Error::DegenerateBatch => "degenerate-batch",
            Error::InvalidState(_) => "invalid-state",
            Error::UndefinedScore(_) => "undefined-score",
            Error::InsufficientData { .. } => "insufficient-data",
        }
    }
}
