use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared symbol `{symbol}` at {line}:{col}")]
    Undeclared { symbol: String, line: usize, col: usize },
    #[error("arity mismatch for `{symbol}` at {line}:{col}: expected {expected}, found {found}")]
    Arity { symbol: String, expected: usize, found: usize, line: usize, col: usize },
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("task file: {0}")]
    Task(String),
    #[error("NON_GROUNDABLE: {0}")]
    NonGroundable(String),
    #[error("NONLINEAR: {0}")]
    NonLinear(String),
    #[error("CASE_EXPLOSION: more than {0} conjuncts")]
    CaseExplosion(usize),
    #[error("grid too large: {0} points")]
    GridTooLarge(u128),
    #[error("hybrid automaton: {0}")]
    Automaton(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Parse-stage failures map to exit code 2 in the task runner.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::Undeclared { .. } | Error::Arity { .. } | Error::Task(_) | Error::Signature(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
