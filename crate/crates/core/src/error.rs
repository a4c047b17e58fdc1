use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are valid but the requested construction cannot serve them.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A bound was requested outside the regime where it is proven.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The request would exceed the configured memory budget.
    #[error(
        "resource limit: polynomial space of dimension d = {dimension} needs {bytes} bytes, budget is {budget} bytes"
    )]
    Resource { dimension: u64, bytes: u64, budget: u64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn not_applicable(msg: impl Into<String>) -> Self {
        Error::NotApplicable(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
