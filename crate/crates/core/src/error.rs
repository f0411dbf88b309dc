use thiserror::Error;

/// Broad classes of failure, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input cannot be read as an instance at all.
    Malformed,
    /// The input is well formed but is not a valid witness.
    Precondition,
    /// The construction broke one of its own guarantees. Always a bug.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("unknown point id `{0}`")]
    UnknownPoint(String),
    #[error("metric axiom violated: {0}")]
    MetricAxiom(String),
    #[error("invalid generator parameters: {0}")]
    Generator(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal invariant violated ({invariant}): {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Malformed(_)
            | Error::UnknownPoint(_)
            | Error::MetricAxiom(_)
            | Error::Generator(_) => ErrorKind::Malformed,
            Error::Precondition(_) => ErrorKind::Precondition,
            Error::Invariant { .. } => ErrorKind::Internal,
        }
    }

    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            invariant,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
