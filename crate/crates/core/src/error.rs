use thiserror::Error;

use crate::moments::DegeneracyClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point cloud is empty")]
    EmptyInput,

    #[error("line {line}: {message}: {content:?}")]
    Parse {
        line: usize,
        content: String,
        message: String,
    },

    /// The cloud's geometry admits no unique cylinder.
    #[error("degenerate input ({class}): {reason}")]
    Degenerate {
        class: DegeneracyClass,
        reason: String,
    },

    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

impl Error {
    pub(crate) fn degenerate(class: DegeneracyClass, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            class,
            reason: reason.into(),
        }
    }
}
