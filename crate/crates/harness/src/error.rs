//! Harness-level errors.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] sysid_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unknown benchmark case '{0}'")]
    UnknownCase(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("malformed records file: {0}")]
    RecordsParse(String),

    #[error("verdict unavailable: need at least 8 iterations, got {got}")]
    TooFewIterations { got: usize },

    #[error("no records to summarize")]
    EmptyRecords,
}

pub type Result<T> = std::result::Result<T, Error>;
