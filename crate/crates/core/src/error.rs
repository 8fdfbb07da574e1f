use thiserror::Error;

use crate::syntax::ClauseId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{at}: {message}")]
    Parse { at: Position, message: String },
    #[error("arity conflict: `{symbol}` used with {first} and {second} arguments{}", .at.map(|p| format!(" at {p}")).unwrap_or_default())]
    ArityConflict {
        symbol: String,
        first: usize,
        second: usize,
        at: Option<Position>,
    },
}

/// Two arrows or an arrow and an atom whose contexts do not line up.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("context mismatch: expected {expected}, found {found}")]
pub struct ContextMismatch {
    pub expected: usize,
    pub found: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("clause {0} has variables; a variable-free program is required")]
    NotGround(ClauseId),
    #[error("clause {0} has an existential variable; use the extended-context semantics")]
    ExistentialEscape(ClauseId),
    #[error("tree roots differ: `{left}` vs `{right}`")]
    RootMismatch { left: String, right: String },
    #[error("unknown export format `{0}` (expected ascii, dot or json)")]
    UnknownFormat(String),
    #[error(transparent)]
    Context(#[from] ContextMismatch),
}
