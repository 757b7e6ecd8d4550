use thiserror::Error;

/// Errors raised by the numerical layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("basis columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("matrix is not an orthogonal projector (deviation {0:.3e})")]
    NotProjector(f64),

    #[error("not a state on the PSD cone: eigenvalue {eigenvalue:.3e} below -{bound:.3e}")]
    NotPositive { eigenvalue: f64, bound: f64 },

    #[error("instance too large for exhaustive solver: {points} points exceeds limit {limit}")]
    TooLarge { points: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// `true` when the error is a solver refusal rather than malformed input.
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::TooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
