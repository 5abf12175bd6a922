use thiserror::Error;

/// Errors raised by the analytic and simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A named parameter is outside its valid range.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    /// Name of the offending parameter, when the error carries one.
    pub fn parameter(&self) -> Option<&'static str> {
        match self {
            Error::InvalidParameter { name, .. } => Some(name),
            Error::Domain(_) => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
