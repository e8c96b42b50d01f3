use thiserror::Error;

use crate::newton::NewtonReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    /// The 2x2 slope system used to eliminate the near-boundary unknowns is singular.
    #[error("singular boundary elimination: determinant {det:e} below threshold {threshold:e}")]
    SingularElimination { det: f64, threshold: f64 },

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The in-plane block system could not be factored.
    #[error("in-plane decoupling failed: block system is singular (pivot ratio {pivot_ratio:e})")]
    DecouplingFailure { pivot_ratio: f64 },

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("newton iteration diverged: {reason}")]
    Diverged {
        reason: String,
        report: Box<NewtonReport>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
