use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map onto the process exit codes of the batch frontend:
/// domain/usage problems exit with 2, horizon and resource exhaustion with 3.
#[derive(Clone, Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (e.g. p < 1, a zero denominator, an empty period).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested horizon exceeds what the input can provide, or a scan
    /// finished without enough structure to report (e.g. fewer than the
    /// minimum number of flow crossings).
    #[error("horizon error: {0}")]
    Horizon(String),

    /// A computation hit a configured resource cap (enumeration ranges,
    /// coefficient overflow, iteration limits).
    #[error("resource error: {0}")]
    Resource(String),

    /// An internal invariant failed. These indicate a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn horizon(msg: impl Into<String>) -> Self {
        Error::Horizon(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Exit code for command-line frontends: 2 for usage/domain errors,
    /// 3 for horizon/resource errors (and internal failures).
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Domain(_) => 2,
            Error::Horizon(_) | Error::Resource(_) | Error::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
