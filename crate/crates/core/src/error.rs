use std::path::PathBuf;

/// Errors raised by loading, validation, and experiment setup.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{msg}, line {line}")]
    Parse { line: u64, msg: String },

    #[error("non-positive value, line {line}")]
    NonPositive { line: u64 },

    #[error("duplicate date {date}, line {line}")]
    DuplicateDate { line: u64, date: String },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("insufficient data: need {needed} samples, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("cannot freeze without warm-up")]
    NoWarmup,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
