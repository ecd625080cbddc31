use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("constraint matrix does not have full row rank")]
    RankDeficient,

    #[error("scaled iterate left the transformation domain: v[{index}] = {value}")]
    DomainViolation { index: usize, value: f64 },

    #[error("full Newton step lost positivity at component {index}")]
    StepInfeasible { index: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration too large: {0}")]
    TooLarge(String),
}
