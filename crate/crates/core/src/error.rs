use thiserror::Error;

use crate::metric::PointId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {0} is not live")]
    DeadPoint(PointId),
    #[error("query budget of {0} queries exhausted")]
    QueryBudgetExceeded(u64),
    #[error("for-all sizing violated: {0}")]
    SizingViolation(String),
    #[error("covering too large: {0}")]
    CoveringTooLarge(String),
    #[error("query outside the covered universe: {0}")]
    OutOfUniverse(String),
    #[error("underpowered test: {0}")]
    Underpowered(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("corrupt index blob: {0}")]
    CorruptBlob(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
