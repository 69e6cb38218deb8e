use thiserror::Error;

/// Errors raised by widthlab operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vectors are rank deficient: numerical rank {rank} < {count}")]
    RankDeficient { rank: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("bad dimensions: {0}")]
    BadDimensions(String),

    #[error("cannot find an essentially bounded subsystem: {0}")]
    CannotSatisfy(String),

    #[error("spectrum exhausted: requested {requested} entries, {available} available")]
    SpectrumExhausted { requested: usize, available: usize },

    #[error("Monte-Carlo variance blow-up: value {value}, half-width {half_width}")]
    VarianceBlowup { value: f64, half_width: f64 },

    #[error("net construction saturated after {0} points")]
    Saturation(usize),

    #[error("bad width order: {0}")]
    BadOrder(String),

    #[error("multiplier sequence is not monotone at index {0}")]
    NotMonotone(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
