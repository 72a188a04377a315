use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or inconsistent input (automaton, word, rate).
    #[error("input error: {0}")]
    Input(String),
    /// A text file could not be parsed.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A search ran out of its state budget.
    #[error("{what}: budget of {limit} states exhausted")]
    Budget { what: &'static str, limit: usize },
    /// An internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),
    /// A word could not be decoded (e.g. a length that is not a multiple of the expansion factor).
    #[error("malformed word: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
