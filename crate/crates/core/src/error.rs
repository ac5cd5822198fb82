use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid distance {0} m: path loss needs a strictly positive distance")]
    InvalidDistance(f64),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

impl SimError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        SimError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by configuration values rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, SimError::InvalidParameter { .. })
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
