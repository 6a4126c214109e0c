use thiserror::Error;

/// A failed `DensityMatrix` invariant. Each invariant has its own variant so
/// callers can tell which check rejected the input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max |M - M^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("trace is {re} + {im}i, expected 1")]
    Trace { re: f64, im: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("factor dimensions multiply to {product}, state dimension is {dim}")]
    FactorDims { product: usize, dim: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the capacity limit {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(#[from] DensityError),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("IO error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
