use thiserror::Error;

/// Errors raised by the analysis modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("circulant embedding has negative eigenvalues up to size {size}")]
    Embedding { size: usize },
    #[error("component period {period} s violates the Nyquist limit {limit} s")]
    Nyquist { period: f64, limit: f64 },
    #[error("band [{f_lo}, {f_hi}] Hz holds {bins} usable bins, need at least {needed}")]
    InsufficientBand {
        f_lo: f64,
        f_hi: f64,
        bins: usize,
        needed: usize,
    },
    #[error("Hurst exponent {h} outside (0, 1)")]
    OutOfRange { h: f64 },
    #[error("spectral exponent {beta} sits on a branch boundary of the fractal dimension formula")]
    BoundaryValue { beta: f64 },
    #[error("input of length {len} too short: need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("scale {scale} outside the admissible range [{min}, {max}]")]
    ScaleOutOfRange { scale: f64, min: f64, max: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("insufficient neighbours: {0}")]
    InsufficientNeighbors(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
