use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis does not contain the required Fock state {0}")]
    MissingState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("division by zero while evaluating {0}")]
    DivisionByZero(&'static str),

    #[error("degenerate intermediate state: coupling {coupling:.3e} across energy gap {gap:.3e}")]
    DegenerateIntermediate { coupling: f64, gap: f64 },

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("adiabaticity failure for tracked state {state} at t = {time}: overlap {overlap:.4}")]
    AdiabaticityFailure { state: usize, time: f64, overlap: f64 },

    #[error("rotation set is not informationally complete (condition number {0:.3e})")]
    IncompleteSet(f64),

    #[error("rotation set is empty")]
    EmptySet,

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
