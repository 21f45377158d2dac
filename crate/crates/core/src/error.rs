use thiserror::Error;

/// Errors raised by tower construction, arithmetic and the verification routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A computed quantity contradicts a proven statement. Never expected; the
    /// message names the statement and the offending data.
    #[error("theorem violation ({statement}): {detail}")]
    TheoremViolation { statement: String, detail: String },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("series truncation too short: {0}")]
    TruncationTooShort(String),

    #[error("element is not a unit: {0}")]
    NotInvertible(String),

    #[error("internal arithmetic error: {0}")]
    Internal(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn violation(statement: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::TheoremViolation {
            statement: statement.into(),
            detail: detail.into(),
        }
    }
}
