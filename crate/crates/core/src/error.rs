use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or map description is malformed.
    #[error("invalid specification: {0}")]
    Spec(String),

    /// An integrand or closed-form evaluation produced a non-finite value.
    #[error("numerical failure at u = {node}: {reason}")]
    Numerical { node: f64, reason: String },

    /// A sample-based estimate could not be formed.
    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    pub(crate) fn numerical(node: f64, reason: impl Into<String>) -> Self {
        Error::Numerical {
            node,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
