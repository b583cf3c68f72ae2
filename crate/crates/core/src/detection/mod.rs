//! Machine error detection: prompt construction, the span wire schema,
//! sanitization of untrusted detector output, and the engine interface.

mod engine;
mod prompt;
mod sanitize;
mod wire;

pub use engine::{
    detect, Detection, DetectionEngine, DetectionError, DetectionRequest, EngineConfig, EngineKind, EngineMetrics,
    EngineRegistry, HttpEngine, StubEngine, STUB_MIN_TOKEN_LEN,
};
pub use prompt::{build_ec1_prompt, WIRE_FIELDS};
pub use sanitize::{model_span_id, sanitize_spans, DropReason, DroppedSpan, SanitizationReport, CLAMP_TOLERANCE};
pub use wire::{parse_ec1_response, serialize_ec1_response, FormatError, RawDetectedSpan};
