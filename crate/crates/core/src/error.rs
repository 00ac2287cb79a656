use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositive { eigenvalue: f64 },

    #[error("map is not completely positive (Choi eigenvalue {eigenvalue:.3e})")]
    NotCompletelyPositive { eigenvalue: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("semidefinite solver failed: {0}")]
    Solver(String),

    #[error("eigendecomposition did not converge")]
    Eigen,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
