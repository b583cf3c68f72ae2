use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TlxError {
    #[error("unknown {kind} {value:?}")]
    UnknownLabel { kind: &'static str, value: String },

    #[error("missing CSV column {0:?}")]
    MissingColumn(&'static str),

    #[error("line {line}: {message}")]
    Row { line: usize, message: String },

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("incomplete design: participant {participant:?} {problem}")]
    IncompleteDesign { participant: String, problem: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}
