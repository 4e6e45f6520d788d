use nalgebra::DMatrix;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid set specification: {0}")]
    InvalidSpec(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("point lies outside the convex hull (violation {violation:e})")]
    OutsideHull { violation: f64 },

    #[error("Dykstra iteration did not converge in {iterations} rounds (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: Box<DMatrix<f64>>,
    },

    #[error("singular value decomposition failed to converge")]
    SvdFailed,

    #[error("objective has no gradient Lipschitz constant; use the error-bound threshold instead")]
    MissingLipschitz,

    #[error("only an inexact penalization guarantee exists for {0}")]
    NoExactThreshold(String),

    #[error("family {0} is not finite and cannot be enumerated")]
    InfiniteFamily(String),

    #[error("enumeration needs {needed} points, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("objective evaluated to a non-finite value")]
    NonFinite,

    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}
