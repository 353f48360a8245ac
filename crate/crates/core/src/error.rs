use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:.3e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not a projector: max |P^2 - P| = {deviation:.3e}")]
    NotProjector { deviation: f64 },

    #[error(
        "eigensolver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("spectral gap is undefined for a {0}-dimensional operator")]
    GapUndefined(usize),

    #[error("matrix is not stoquastic: off-diagonal entry ({row}, {col}) = {value:.3e}")]
    NotStoquastic { row: usize, col: usize, value: f64 },

    #[error("matrix is not tridiagonal: entry ({row}, {col}) is nonzero")]
    NotTridiagonal { row: usize, col: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
