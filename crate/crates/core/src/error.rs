use thiserror::Error;

/// Errors raised by the library.
///
/// Input and domain errors are caller mistakes, budget errors mean an
/// exhaustive enumeration was refused rather than silently truncated, and
/// invariant errors indicate a bug or an input that violates a stated
/// precondition (e.g. a non-monotone valuation fed to a monotone-only oracle).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: String,
        needed: String,
        limit: String,
    },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub fn budget(what: impl Into<String>, needed: impl ToString, limit: impl ToString) -> Self {
        Error::Budget {
            what: what.into(),
            needed: needed.to_string(),
            limit: limit.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
