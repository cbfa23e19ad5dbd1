use std::fmt;

use thiserror::Error;

/// Position of a syntax construct in source text (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },

    #[error("duplicate name `{name}` at {span}")]
    DuplicateName { name: String, span: SourceSpan },

    #[error("unbound name `{name}` at {span}")]
    UnboundName { name: String, span: SourceSpan },

    #[error("arity mismatch for `{name}`: expected {expected}, got {found}")]
    Arity { name: String, expected: usize, found: usize },

    #[error("bound exceeded: {what} (limit {limit})")]
    BoundExceeded { what: String, limit: usize },

    #[error("invalid seed for `{var}`: seed is not contained in its own step image")]
    SeedInvalid { var: String },

    #[error("non-monotone construction: {0}")]
    NonMonotone(String),

    #[error("fixpoint iteration for `{var}` did not converge within {cap} steps")]
    NoConvergence { var: String, cap: usize },

    #[error("unbound constant `{0}`")]
    UnboundConst(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("no valuation for constant `{0}`")]
    MissingValuation(String),

    #[error("carrier of size {size} exceeds oracle cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        Error::Syntax { span, message: message.into() }
    }

    pub fn bound(what: impl Into<String>, limit: usize) -> Self {
        Error::BoundExceeded { what: what.into(), limit }
    }

    /// True for errors raised while reading source text rather than evaluating it.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::DuplicateName { .. } | Error::UnboundName { .. } | Error::Arity { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
