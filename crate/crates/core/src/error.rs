use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NonHermitianInput(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("records disagree on the Hilbert-space dimension")]
    InconsistentDimensions,

    #[error("dataset has no records with a positive count")]
    EmptyDataset,

    #[error("all eigenvalues are non-positive after clamping")]
    ZeroTraceAfterClamp,

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid observable basis: {0}")]
    InvalidBasis(String),

    #[error("invalid measurement plan: {0}")]
    InvalidPlan(String),

    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),

    #[error("outcome probability {0:.3e} too small for Fisher information")]
    SingularProbability(f64),

    #[error("least-squares Lagrange multiplier vanishes ({0:.3e}); POVM undefined")]
    DegenerateLambda(f64),

    #[error("operation requires a qubit (dim 2), got dim {0}")]
    RequiresQubit(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
