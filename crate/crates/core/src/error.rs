use thiserror::Error;

/// Errors produced by the numerical pipeline.
///
/// The three variants map onto distinct failure classes so that callers
/// (in particular the CLI) can translate them into stable exit codes:
/// `Domain` and `Invalid` are caller mistakes, `Budget` means an adaptive
/// computation refused to degrade silently.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter or parameter combination violates a documented constraint.
    #[error("invalid parameter: {0}")]
    Invalid(String),

    /// An adaptive computation could not reach the requested accuracy or
    /// size within its configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
