use thiserror::Error;

use crate::metric::ProductPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid contraction constants: {0}")]
    InvalidConstants(String),

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// A response map produced a non-finite value.
    #[error("evaluation failed at iteration {iteration} from {point:?}")]
    Evaluation { iteration: usize, point: ProductPoint },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("I - A is singular (pivot {pivot:e}); no unique fixed point")]
    Singular { pivot: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("infeasible model: {0}")]
    Infeasible(String),
}
