use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected} values, got {actual}")]
    DomainMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix field `{label}` is not positive definite at node {node} (x = {x:?}, min eigenvalue {min_eig:e})")]
    NotPositiveDefinite {
        label: String,
        node: usize,
        x: [f64; 2],
        min_eig: f64,
    },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("index {index} out of range (available: {available})")]
    OutOfRange { index: usize, available: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("inner solve did not converge after {iterations} iterations (last residual {residual:e}); the monotonicity constant is likely violated along the path")]
    InnerSolveFailed { iterations: usize, residual: f64 },

    #[error("no convergent starts among {attempted} attempts: {summary}")]
    NoConvergentStarts { attempted: usize, summary: String },

    #[error("expression parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid cubical pair: {0}")]
    InvalidPair(String),

    #[error("homology unstable across resolutions {coarse} and {fine}: {coarse_ranks:?} vs {fine_ranks:?}")]
    Unstable {
        coarse: usize,
        fine: usize,
        coarse_ranks: Vec<usize>,
        fine_ranks: Vec<usize>,
    },

    #[error("index computation failed: {0}")]
    Index(String),

    #[error("missing hypothesis report: {0}")]
    MissingHypothesis(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
