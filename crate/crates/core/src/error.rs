use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: start {start}, length {len} on a grid of {cells} cells")]
    InvalidInterval {
        start: usize,
        len: usize,
        cells: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires a real-valued function")]
    ComplexUnsupported,

    #[error("grid mismatch: expected {expected} cells, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("Young function evaluation left its domain: {0}")]
    EvaluatorDomain(String),

    #[error("unsupported Young function: {0}")]
    Unsupported(String),

    #[error(
        "sparse construction failed at level {level} index {index}: |E(Q)| = {e_cells} < |Q|/2 = {half}"
    )]
    ConstructionFailure {
        level: u32,
        index: usize,
        e_cells: usize,
        half: f64,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("degenerate trial {trial}: rhs = 0 while lhs = {lhs}")]
    DegenerateTrial { trial: usize, lhs: f64 },

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
