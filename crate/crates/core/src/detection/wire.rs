//! The `{"error_spans": [...]}` wire schema emitted by detectors.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::prompt::WIRE_FIELDS;

/// One span exactly as a detector reported it, before any checking.
///
/// Indices are signed so that negative values reach the sanitizer (and get
/// dropped there) instead of failing the whole response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDetectedSpan {
    pub original_text: String,
    pub error_type: String,
    pub error_severity: String,
    pub start_index_orig: i64,
    pub end_index_orig: i64,
    pub start_index_translation: i64,
    pub end_index_translation: i64,
    pub correct_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("missing field {field:?}{}", at_index(*.index))]
    MissingField { field: String, index: Option<usize> },
    #[error("field {field:?}{} must be {expected}", at_index(*.index))]
    WrongType {
        field: String,
        index: Option<usize>,
        expected: &'static str,
    },
}

fn at_index(index: Option<usize>) -> String {
    index.map(|i| format!(" in error_spans[{i}]")).unwrap_or_default()
}

#[derive(Serialize)]
struct ResponseRef<'a> {
    error_spans: &'a [RawDetectedSpan],
}

/// Serialize spans in the wire schema.
pub fn serialize_ec1_response(spans: &[RawDetectedSpan]) -> String {
    serde_json::to_string(&ResponseRef { error_spans: spans }).expect("plain data serializes")
}

/// Parse a detector response body. A surrounding Markdown code fence is
/// tolerated; extra fields are ignored.
pub fn parse_ec1_response(body: &str) -> Result<Vec<RawDetectedSpan>, FormatError> {
    let trimmed = strip_code_fence(body);
    let value: Value = serde_json::from_str(trimmed).map_err(|e| FormatError::Malformed {
        offset: byte_offset(trimmed, e.line(), e.column()) + (trimmed.as_ptr() as usize - body.as_ptr() as usize),
        message: e.to_string(),
    })?;
    let root = value.as_object().ok_or(FormatError::WrongType {
        field: "<root>".into(),
        index: None,
        expected: "an object",
    })?;
    let spans = root.get("error_spans").ok_or_else(|| FormatError::MissingField {
        field: "error_spans".into(),
        index: None,
    })?;
    let spans = spans.as_array().ok_or(FormatError::WrongType {
        field: "error_spans".into(),
        index: None,
        expected: "an array",
    })?;
    spans
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let obj = v.as_object().ok_or(FormatError::WrongType {
                field: "error_spans".into(),
                index: Some(i),
                expected: "an array of objects",
            })?;
            raw_span(obj, i)
        })
        .collect()
}

fn raw_span(obj: &Map<String, Value>, index: usize) -> Result<RawDetectedSpan, FormatError> {
    // check every field in wire order so the first missing one is reported
    for field in WIRE_FIELDS {
        if !obj.contains_key(field) {
            return Err(FormatError::MissingField {
                field: field.into(),
                index: Some(index),
            });
        }
    }
    let text = |field: &str| -> Result<String, FormatError> {
        obj[field].as_str().map(str::to_owned).ok_or(FormatError::WrongType {
            field: field.into(),
            index: Some(index),
            expected: "a string",
        })
    };
    let int = |field: &str| -> Result<i64, FormatError> {
        obj[field].as_i64().ok_or(FormatError::WrongType {
            field: field.into(),
            index: Some(index),
            expected: "an integer",
        })
    };
    Ok(RawDetectedSpan {
        original_text: text("original_text")?,
        error_type: text("error_type")?,
        error_severity: text("error_severity")?,
        start_index_orig: int("start_index_orig")?,
        end_index_orig: int("end_index_orig")?,
        start_index_translation: int("start_index_translation")?,
        end_index_translation: int("end_index_translation")?,
        correct_text: text("correct_text")?,
    })
}

fn strip_code_fence(body: &str) -> &str {
    let t = body.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let rest = rest.strip_prefix("json").unwrap_or(rest);
    rest.strip_suffix("```").unwrap_or(rest).trim()
}

/// serde_json reports 1-based line and column (column counted in bytes).
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list() {
        assert_eq!(parse_ec1_response(r#"{"error_spans": []}"#).unwrap(), vec![]);
    }

    #[test]
    fn missing_field_is_named() {
        let body = r#"{"error_spans":[{"original_text":"a","error_type":"Spelling","error_severity":"Minor",
            "start_index_orig":0,"end_index_orig":1,"start_index_translation":0,"correct_text":"x"}]}"#;
        let err = parse_ec1_response(body).unwrap_err();
        assert_eq!(
            err,
            FormatError::MissingField {
                field: "end_index_translation".into(),
                index: Some(0)
            }
        );
        assert!(err.to_string().contains("end_index_translation"));
    }

    #[test]
    fn missing_top_level_key() {
        let err = parse_ec1_response(r#"{"errors": []}"#).unwrap_err();
        assert_eq!(
            err,
            FormatError::MissingField {
                field: "error_spans".into(),
                index: None
            }
        );
    }

    #[test]
    fn non_integer_index() {
        let body = r#"{"error_spans":[{"original_text":"a","error_type":"Spelling","error_severity":"Minor",
            "start_index_orig":"0","end_index_orig":1,"start_index_translation":0,
            "end_index_translation":1.5,"correct_text":"x"}]}"#;
        match parse_ec1_response(body).unwrap_err() {
            FormatError::WrongType { field, expected, .. } => {
                assert_eq!(field, "start_index_orig");
                assert_eq!(expected, "an integer");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_reports_byte_offset() {
        let body = "{\"error_spans\": [\n  {,}\n]}";
        match parse_ec1_response(body).unwrap_err() {
            FormatError::Malformed { offset, .. } => assert_eq!(&body[offset..offset + 1], ","),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fenced_body_and_extra_fields() {
        let body = "```json\n{\"error_spans\":[{\"original_text\":\"a\",\"error_type\":\"Grammar\",\
            \"error_severity\":\"Major\",\"start_index_orig\":0,\"end_index_orig\":1,\
            \"start_index_translation\":2,\"end_index_translation\":3,\"correct_text\":\"\",\"confidence\":0.9}],\
            \"model\":\"x\"}\n```";
        let spans = parse_ec1_response(body).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].error_type, "Grammar");
        assert_eq!(spans[0].start_index_translation, 2);
    }

    #[test]
    fn serialized_field_order_matches_wire() {
        let span = RawDetectedSpan {
            original_text: "a".into(),
            error_type: "Grammar".into(),
            error_severity: "Minor".into(),
            start_index_orig: 0,
            end_index_orig: 1,
            start_index_translation: 0,
            end_index_translation: 1,
            correct_text: "".into(),
        };
        let json = serialize_ec1_response(std::slice::from_ref(&span));
        let positions: Vec<usize> = WIRE_FIELDS.iter().map(|f| json.find(f).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(parse_ec1_response(&json).unwrap(), vec![span]);
    }
}
