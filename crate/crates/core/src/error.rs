use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("detector side m = {m} is too small for specimen side n = {n} (need m >= {required})")]
    DetectorTooSmall { n: usize, m: usize, required: usize },

    #[error("matrix is rank deficient (non-positive pivot {pivot:e} at column {column})")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("specimen side n = {n} exceeds the dense oracle cap of {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported reference kind for this operation: {0}")]
    UnsupportedKind(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
