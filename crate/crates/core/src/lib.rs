//! Core model for machine-translation post-editing.
//!
//! * [`span`] and [`text`]: the error-span vocabulary and code-point
//!   arithmetic every other module builds on.
//! * [`annotation`]: pairs, annotations, validation, and span editing with
//!   re-anchoring across text edits.
//! * [`detection`]: prompt construction, the detector wire schema,
//!   sanitization, and pluggable detection engines.
//! * [`export`]: JSON/CSV dataset export and validated JSON import.

pub mod annotation;
pub mod detection;
pub mod error;
pub mod export;
pub mod span;
pub mod text;

pub use annotation::{
    apply_edit, delete_span, merge_suggestions, upsert_span, validate_annotation, Annotation, EditOutcome, PairStatus,
    Rule, TranslationPair, Violation,
};
pub use error::SpanError;
pub use span::{CharRange, ErrorCategory, ErrorSpan, Provenance, Severity, SpanId, Splice};
pub use text::{code_point_length, extract_span_text};
