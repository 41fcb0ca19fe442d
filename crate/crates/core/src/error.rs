use thiserror::Error;

/// Errors raised across the crate.
///
/// Named check failures inside verification reports are not errors; they are
/// recorded as failed checks in the report payload.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("sampling failed for (k={k}, l={l}, r={r}): {detail}")]
    SamplingFailure {
        k: usize,
        l: usize,
        r: usize,
        detail: String,
    },

    #[error("verification failed: {0}")]
    VerificationFailure(String),

    #[error("oracle inconclusive: {0}")]
    OracleInconclusive(String),

    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
