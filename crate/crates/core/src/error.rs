use thiserror::Error;

/// Errors raised by the solvers, problem generators and harness.
#[derive(Debug, Error)]
pub enum NcgError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    /// A non-finite intermediate value appeared inside an iterative routine.
    #[error("numerical failure in {stage} at iteration {iteration}")]
    NumericalFailure { stage: &'static str, iteration: usize },

    /// Finite-difference check hit a non-finite objective or gradient value.
    #[error("non-finite evaluation at coordinate {coordinate}")]
    NonFiniteEvaluation { coordinate: usize },

    #[error("line search exceeded {j_max} backtracking steps")]
    LineSearchFailure { j_max: usize },

    #[error("malformed instance file: {0}")]
    InstanceFormat(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = NcgError> = std::result::Result<T, E>;
