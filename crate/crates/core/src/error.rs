use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid norm `{input}`: {reason} (expected O(ec), P(ec), O(cec,ec,+|-) or P(cec,ec,+|-) with codes 1-20)")]
    NormSyntax { input: String, reason: String },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An internal invariant failed; results computed so far cannot be trusted.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("model bank file: {0}")]
    BankFormat(String),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that indicate a bug or broken invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Contract(_) | Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
