use alloc::string::String;
use core::fmt;

/// Crate-wide error type.
///
/// Randomized constructions never fail silently: when a verification pass
/// cannot be satisfied within the retry budget the failure names the operation
/// and the clause that failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition on the inputs was violated.
    InvalidInput(String),
    /// A randomized construction exhausted its retry budget.
    RetriesExhausted { op: &'static str, detail: String },
    /// A deterministic search (Hamilton cycle, link path, merging swap)
    /// came up empty.
    SearchFailed { op: &'static str, detail: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::RetriesExhausted { op, detail } => {
                write!(f, "{op}: retry budget exhausted ({detail})")
            }
            Error::SearchFailed { op, detail } => write!(f, "{op}: search failed ({detail})"),
        }
    }
}
