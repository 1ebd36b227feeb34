use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("lapack failure: {0}")]
    Linalg(String),

    #[error(
        "biorthogonality residual {residual:.3e} exceeds {limit:.1e}; \
         perturb the model parameters slightly away from this point"
    )]
    Biorthogonality { residual: f64, limit: f64 },

    #[error("occupied set contains near-defective eigenpairs {indices:?}")]
    DefectiveSea { indices: Vec<usize> },

    #[error("singular entanglement cut: xi^2 + (1-xi)^2 = {value:.3e} for block eigenvalue {index}")]
    SingularCut { index: usize, value: f64 },

    #[error("system size {size} exceeds the exact-diagonalization cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("geometry mismatch: {0}")]
    Geometry(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
