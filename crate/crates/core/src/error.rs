use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("dimension mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("truncation mismatch: degree {degree} exceeds D_max = {d_max}")]
    Truncation { degree: usize, d_max: usize },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error(
        "Parseval check failed: captured energy {captured:.3e} exceeds norm {norm_sq:.3e} \
         by {excess:.3e}; quadrature is too coarse"
    )]
    Parseval {
        captured: f64,
        norm_sq: f64,
        excess: f64,
    },

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("set too sparse in subspace: {attempts} consecutive rejections")]
    TooSparse { attempts: usize },
}
