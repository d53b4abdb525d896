use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A cell on which two contexts disagree (one says cross, the other blank).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConflictCell {
    pub object: String,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("contexts are defined over different attribute lists")]
    IncompatibleContexts,

    #[error("implication or theory does not belong to this attribute universe")]
    IncompatibleUniverse,

    #[error("conflicting information in {} cell(s){}", .0.len(), fmt_first_conflict(.0))]
    Conflict(Vec<ConflictCell>),

    #[error("capacity exceeded: {what} is {actual}, limit is {limit}")]
    Capacity {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },

    #[error("context is not complete: cell ({object}, {attribute}) is unknown")]
    Incomplete { object: String, attribute: String },

    #[error("invalid counterexample `{object}`: {reason}")]
    InvalidCounterexample { object: String, reason: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("stale question {question_id}: {reason}")]
    Stale { question_id: u64, reason: String },

    #[error("state error: {0}")]
    State(String),

    #[error("invalid strategy configuration: {0}")]
    Strategy(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("replay failed at line {line}: {message}")]
    Replay { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

fn fmt_first_conflict(cells: &[ConflictCell]) -> String {
    match cells.first() {
        Some(c) => format!(", first at ({}, {})", c.object, c.attribute),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
