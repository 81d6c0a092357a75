use thiserror::Error;

use crate::model::Outcome;

/// Errors raised by the model, solver, geometry and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported model n = {0}: only n = ±1 and n = ±2 are admissible")]
    UnsupportedModel(i32),

    #[error("cell {cell} has zero probability at theta = {theta}; the log/ratio Fisher forms are singular there")]
    SingularCell { cell: Outcome, theta: f64 },

    #[error("point lies on the boundary of the simplex: component {index} is zero")]
    SimplexBoundary { index: usize },

    #[error("theta = {theta} is not on the open principal branch (0, {upper})")]
    SingularBranch { theta: f64, upper: f64 },

    #[error("curve has no closed-form derivative; use finite differences")]
    MissingDerivative,
}

impl EpiError {
    /// Stable machine-readable kind, used in structured error records.
    pub fn kind(&self) -> &'static str {
        match self {
            EpiError::InvalidArgument(_) => "invalid_argument",
            EpiError::UnsupportedModel(_) => "unsupported_model",
            EpiError::SingularCell { .. } => "singular_cell",
            EpiError::SimplexBoundary { .. } => "simplex_boundary",
            EpiError::SingularBranch { .. } => "singular_branch",
            EpiError::MissingDerivative => "missing_derivative",
        }
    }
}

pub type Result<T> = std::result::Result<T, EpiError>;

pub(crate) fn invalid(msg: impl Into<String>) -> EpiError {
    EpiError::InvalidArgument(msg.into())
}
