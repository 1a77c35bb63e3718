use std::fmt;

use thiserror::Error;

/// Byte range into a parsed input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> SourceSpan {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("symbol `{symbol}` has rank {expected} but is used with {found} children")]
    RankMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("position {0} is out of range")]
    PositionOutOfRange(String),
    #[error("expected {expected} trees, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid homomorphism: {0}")]
    InvalidHomomorphism(String),
    #[error("grammar has the wrong shape: {0}")]
    Shape(String),
    #[error("state mismatch: expected `{expected}`, found `{found}`")]
    StateMismatch { expected: String, found: String },
    #[error("sink parity violated: {0}")]
    SinkParity(String),
    #[error("step index {index} out of range for a derivation of length {len}")]
    StepOutOfRange { index: usize, len: usize },
    #[error("invalid derivation: {0}")]
    InvalidDerivation(String),
    #[error("no derivation of sufficient height: {0}")]
    NoTallDerivation(String),
    #[error("grammar does not have the large duplication property")]
    NoLdp,
    #[error("blowup guard exceeded: more than {cap} {what}")]
    Blowup { cap: usize, what: &'static str },
    #[error("{0}")]
    Validation(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Any of the above, tied to a place in parsed input.
    #[error("at {span}: {inner}")]
    Located { span: SourceSpan, inner: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, span: SourceSpan) -> Error {
        match self {
            e @ (Error::Syntax { .. } | Error::Located { .. }) => e,
            e => Error::Located {
                span,
                inner: Box::new(e),
            },
        }
    }

    /// The underlying error with any location stripped.
    pub fn kind(&self) -> &Error {
        match self {
            Error::Located { inner, .. } => inner.kind(),
            e => e,
        }
    }

    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            Error::Syntax { span, .. } | Error::Located { span, .. } => Some(*span),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
