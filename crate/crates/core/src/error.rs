use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("matrix is not positive semi-definite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("design error: {0}")]
    Design(String),
    #[error("contrast error: {0}")]
    Contrast(String),
    #[error("hypothesis matrix has rank zero")]
    Rank,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
