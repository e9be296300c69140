//! Error taxonomy. Budget and precision exhaustion are kept distinct from
//! domain violations so callers (and exit codes) can tell them apart.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's stated domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// p-adic digits or tree depth insufficient to canonicalize a result.
    #[error("precision exhausted: {0}")]
    Precision(String),

    /// An enumeration or search budget ran out before a decision was reached.
    #[error("budget exhausted: {0}")]
    Budget(String),

    /// Structurally degenerate input (zero gap, zero Lebesgue number, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Scenario/config parse or validation failure.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn precision(msg: impl Into<String>) -> Self {
        Error::Precision(msg.into())
    }
    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
