use thiserror::Error;

pub type Result<T, E = HsbError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HsbError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("entry ({row}, {col}) is negative but the matrix is tagged nonnegative")]
    NegativeEntry { row: usize, col: usize },

    #[error("scalar must be positive, got {0}")]
    NonPositiveScalar(String),

    #[error("matrix is identically zero; the bound requires S not identically zero")]
    ZeroMatrix,

    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("scalar mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("rational mode requires rows*cols <= {limit}, got {cells}")]
    RationalTooLarge { cells: usize, limit: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("certificate invalid: max residual {residual} at ({row}, {col})")]
    CertificateInvalid {
        residual: f64,
        row: usize,
        col: usize,
    },

    #[error("LP solver failure: {0}")]
    SolverFailure(String),

    #[error("time limit exceeded")]
    TimeLimit,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl HsbError {
    pub(crate) fn dims(expected: (usize, usize), found: (usize, usize)) -> Self {
        HsbError::DimensionMismatch {
            expected: format!("{}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        }
    }
}
