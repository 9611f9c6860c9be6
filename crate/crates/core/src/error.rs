use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("magnetic length mismatch: {0} vs {1}")]
    LengthMismatch(f64, f64),
    #[error("identity violated: {what} (deviation {deviation:.3e}, tolerance {tolerance:.1e})")]
    IdentityViolation {
        what: String,
        deviation: f64,
        tolerance: f64,
    },
    #[error("quadrature did not converge: estimated error {0:.3e}")]
    QuadratureNotConverged(f64),
    #[error("not a projection (defect {0:.3e})")]
    NotAProjection(f64),
    #[error("value {0} is not within tolerance of an integer")]
    NotIntegral(f64),
    #[error("ladder is not usable: {0}")]
    BadLadder(String),
    #[error("arity mismatch: expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
