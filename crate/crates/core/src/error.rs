use thiserror::Error;

use crate::annotation::Violation;
use crate::span::SpanId;

/// Failures of span editing and index arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("index {index} out of bounds for text of {len} code points")]
    OutOfBounds { index: usize, len: usize },

    #[error("invalid range [{start}, {end})")]
    InvalidRange { start: usize, end: usize },

    #[error("span overlaps existing span(s): {}", join_ids(.conflicting))]
    Overlap { conflicting: Vec<SpanId> },

    #[error("span {0} not found")]
    NotFound(SpanId),

    #[error("annotation failed validation ({} violation(s))", .0.len())]
    Invalid(Vec<Violation>),
}

fn join_ids(ids: &[SpanId]) -> String {
    ids.iter().map(SpanId::as_str).collect::<Vec<_>>().join(", ")
}

/// Unknown label for a closed vocabulary (category, severity, status, ...).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} {value:?}")]
pub struct ParseLabelError {
    pub kind: &'static str,
    pub value: String,
}
