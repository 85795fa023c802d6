use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("vector {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("not a frame: lower frame bound {lower:e} is degenerate against upper bound {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("frame is not tight (B/A = {ratio}); tighten it first")]
    NotTight { ratio: f64 },

    #[error("matrix is not a symmetric idempotent: {0}")]
    NotProjection(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration of {count} subsets exceeds the limit of {limit}")]
    EnumerationTooLarge { count: u128, limit: u64 },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FrameError>;
