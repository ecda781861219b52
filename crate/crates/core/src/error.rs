use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate velocity slice: density {rho:e} is not positive")]
    DegenerateSlice { rho: f64 },

    #[error("temperature tensor is not positive definite: smallest eigenvalue {lambda_min:e} is below the floor {floor:e}")]
    TensorDegeneracy { lambda_min: f64, floor: f64 },

    #[error("degenerate boundary data: {0}")]
    DegenerateData(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
