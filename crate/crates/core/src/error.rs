use thiserror::Error;

/// Errors raised by constructors and numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetroqError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian within tolerance ({0})")]
    NotHermitian(String),

    #[error("matrix is not unitary within tolerance ({0})")]
    NotUnitary(String),

    #[error("operator is not positive semidefinite: smallest eigenvalue {min_eig:e}")]
    NotPsd { min_eig: f64 },

    #[error("invalid stochastic matrix: {0}")]
    NotStochastic(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid Kraus set: {0}")]
    InvalidKraus(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("derivative is nonzero on an outcome with zero probability (index {index})")]
    SupportMismatch { index: usize },

    #[error("memory cap exceeded: {required} entries requested, cap is {cap}")]
    CapExceeded { required: usize, cap: usize },

    #[error("truncated tail mass {tail:e} exceeds tolerance {tol:e}")]
    TailMass { tail: f64, tol: f64 },

    #[error("no Kraus gauge with vanishing beta exists (residual {residual:e})")]
    BetaInfeasible { residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, MetroqError>;
