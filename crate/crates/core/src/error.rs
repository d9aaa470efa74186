use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("field is in {got} space, operation requires {expected} space")]
    WrongSpace {
        expected: crate::grid::Space,
        got: crate::grid::Space,
    },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("state lies outside the discrete D0 class: zero-mode coefficient {0:.3e}")]
    OutsideCore(f64),
    #[error("iteration did not converge after {iterations} steps (last residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("smallness condition fails: sup norm {0:.4} >= 1")]
    SmallnessViolated(f64),
    #[error("potential carries no decay certificate")]
    MissingCertificate,
    #[error("Neumann series diverges: term {depth} has norm {norm:.3e}")]
    NeumannDivergence { depth: usize, norm: f64 },
    #[error("wave packet reached the box boundary (boundary mass {0:.3e})")]
    BoxExit(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
