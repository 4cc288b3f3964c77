use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// `Validation` covers malformed inputs (bad shapes, out-of-range
/// parameters); `Numerical` covers runtime invariant violations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("inner product with beta > 0 requires a bound Hamiltonian")]
    UnboundThermalInnerProduct,

    #[error("superoperator of dimension {dim} exceeds the dense size guard ({limit}); use the matrix-free Liouvillian")]
    SuperoperatorTooLarge { dim: usize, limit: usize },

    #[error("initial observable has zero norm")]
    ZeroObservable,

    #[error("inner-product property 2 violated: |<O_{step}|L O_{step}>| = {value:e} exceeds {tolerance:e}")]
    DiagonalCoefficient { step: usize, value: f64, tolerance: f64 },

    #[error("Krylov basis was not stored")]
    BasisNotStored,

    #[error("Lanczos coefficient b_{index} = {value} is not positive")]
    NonPositiveCoefficient { index: usize, value: f64 },

    #[error("rk4 norm drift {drift:e} exceeds 1e-6; reduce the step size")]
    NormDrift { drift: f64 },

    #[error("truncation at N = {size} leaves tail mass {tail:e} above {limit:e}")]
    TruncationTooSmall { size: usize, tail: f64, limit: f64 },

    #[error("deviation time undefined: {0}")]
    DeviationTimeUndefined(String),

    #[error("n = {n} lies beyond the Krylov dimension for alpha = {alpha}, gamma = {gamma}")]
    BeyondKrylovDimension { n: usize, alpha: f64, gamma: f64 },

    #[error("eigen-solver did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("malformed model spec `{spec}`: {reason}")]
    ModelSpec { spec: String, reason: String },

    #[error("io: {0}")]
    Io(String),

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// True for errors that signal a violated numerical invariant rather
    /// than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DiagonalCoefficient { .. }
                | Error::NormDrift { .. }
                | Error::TruncationTooSmall { .. }
                | Error::DeviationTimeUndefined(_)
                | Error::NoConvergence(_)
        )
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
