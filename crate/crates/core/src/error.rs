use thiserror::Error;

/// Errors produced by estimation, inference and data handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample too small: need at least {needed} observations, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error("non-finite value at observation {index}")]
    NonFinite { index: usize },

    #[error("index {index} out of range for sample of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("zero is not inside the convex hull of the pseudo-values")]
    HullViolation,

    #[error("pseudo-value rows are affinely degenerate (singular covariance)")]
    SingularCovariance,

    #[error("Lagrange multiplier solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("negative variance supplied: {0}")]
    NegativeVariance(f64),

    #[error("{name} = {value} is outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("scatter matrix is not positive definite")]
    InvalidScatter,

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid configuration key `{key}`: {reason}")]
    ConfigInvalid { key: String, reason: String },

    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
