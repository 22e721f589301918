use thiserror::Error;

/// Every failure the interpreter and the reconstruction engine can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{column}: lex error: {message}")]
    Lex {
        message: String,
        line: usize,
        column: usize,
    },

    #[error("{line}:{column}: parse error: expected {}, found {found}", expected.join(" or "))]
    Parse {
        expected: Vec<String>,
        found: String,
        line: usize,
        column: usize,
    },

    #[error("unresolved identifier `{0}`")]
    UnresolvedIdentifier(String),

    #[error("dimension `{0}` is not bound in the current context")]
    UnboundDimension(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("`{name}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("expansion error: {0}")]
    Expansion(String),

    #[error("observation sequence `{0}` is generic (some opt > 0); use expand_sequence")]
    AmbiguousExpansion(String),

    #[error("stream along `{0}` has no end-of-data within the evaluation limit")]
    UnboundedStream(String),

    #[error("recursion limit of {0} exceeded")]
    RecursionLimit(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Source position, for errors that carry one.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            Error::Lex { line, column, .. } | Error::Parse { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }
}
