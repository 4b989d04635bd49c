//! Error type shared by the core modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by the algorithmic core.
///
/// The variants mirror the failure classes the CLI maps to exit codes:
/// configuration (bad parameters), domain (bad call arguments) and numerical
/// (non-finite quantities surfacing mid-computation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// A configuration value violates its invariants.
    Config(String),
    /// An argument is outside an operation's domain.
    Domain(String),
    /// A computation produced a non-finite or otherwise unusable value.
    Numerical {
        message: String,
        /// Task that triggered the failure, when one is attributable.
        task: Option<u64>,
    },
}

impl CoreError {
    pub fn config(message: impl Into<String>) -> Self {
        CoreError::Config(message.into())
    }

    pub fn domain(message: impl Into<String>) -> Self {
        CoreError::Domain(message.into())
    }

    pub fn numerical(message: impl Into<String>, task: Option<u64>) -> Self {
        CoreError::Numerical {
            message: message.into(),
            task,
        }
    }
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Config(msg) => write!(f, "configuration error: {msg}"),
            CoreError::Domain(msg) => write!(f, "domain error: {msg}"),
            CoreError::Numerical { message, task } => match task {
                Some(id) => write!(f, "numerical error (task {id}): {message}"),
                None => write!(f, "numerical error: {message}"),
            },
        }
    }
}

impl core::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
