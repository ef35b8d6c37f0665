use thiserror::Error;

use crate::wave::Point2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CloakError {
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a point where the field or kernel is singular.
    #[error("singular evaluation at ({}, {})", .0.x, .0.y)]
    Singular(Point2),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("level set not found: {0}")]
    NotFound(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CloakError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CloakError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CloakError>;
