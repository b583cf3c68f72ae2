//! ESA/MQM-style dataset export to JSON and CSV, and validated JSON import.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::annotation::{span_violations, Annotation, Rule, TranslationPair, Violation, MAX_OVERALL_SCORE};
use crate::span::{CharRange, ErrorCategory, ErrorSpan, Provenance, Severity, SpanId};
use crate::text::code_point_length;

pub const FORMAT_VERSION: &str = "1.0";
pub const SPAN_UNIT: &str = "unicode_code_point";

pub const CSV_HEADER: [&str; 16] = [
    "pair_id",
    "source_lang",
    "target_lang",
    "source_text",
    "mt_text",
    "corrected_text",
    "annotator_id",
    "overall_score",
    "category",
    "severity",
    "source_start",
    "source_end",
    "translation_start",
    "translation_end",
    "explanation",
    "provenance",
];

/// One exported span. Translation indices refer to `corrected_text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSpan {
    pub category: ErrorCategory,
    pub severity: Severity,
    pub source_start: Option<usize>,
    pub source_end: Option<usize>,
    pub translation_start: usize,
    pub translation_end: usize,
    pub explanation: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportRecord {
    pub pair_id: String,
    pub source_lang: String,
    pub target_lang: String,
    pub source_text: String,
    pub mt_text: String,
    pub corrected_text: String,
    pub annotator_id: String,
    pub overall_score: Option<u8>,
    pub spans: Vec<ExportSpan>,
}

impl ExportRecord {
    pub fn from_annotation(pair: &TranslationPair, annotation: &Annotation) -> Self {
        let mut spans: Vec<&ErrorSpan> = annotation.spans.iter().collect();
        spans.sort_by_key(|s| s.translation_range);
        ExportRecord {
            pair_id: pair.pair_id.clone(),
            source_lang: pair.source_lang.clone(),
            target_lang: pair.target_lang.clone(),
            source_text: pair.source_text.clone(),
            mt_text: pair.mt_text.clone(),
            corrected_text: annotation.corrected_text.clone(),
            annotator_id: annotation.annotator_id.clone(),
            overall_score: annotation.overall_score,
            spans: spans
                .into_iter()
                .map(|s| ExportSpan {
                    category: s.category,
                    severity: s.severity,
                    source_start: s.source_range.map(CharRange::start),
                    source_end: s.source_range.map(CharRange::end),
                    translation_start: s.translation_range.start(),
                    translation_end: s.translation_range.end(),
                    explanation: s.explanation.clone(),
                    provenance: s.provenance,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("record {record}: {rule}")]
    Validation { record: usize, rule: String },
    #[error("unsupported format_version {0:?}")]
    Version(String),
    #[error("malformed export document: {0}")]
    Malformed(String),
}

/// Invariant check for one record; `Err` carries the first broken rule.
pub fn validate_record(record: &ExportRecord) -> Result<(), String> {
    if record.pair_id.is_empty() {
        return Err("pair_id must not be empty".into());
    }
    if record.source_text.is_empty() || record.mt_text.is_empty() {
        return Err("source_text and mt_text must not be empty".into());
    }
    if let Some(score) = record.overall_score {
        if score > MAX_OVERALL_SCORE {
            return Err(format!("overall_score {score} exceeds {MAX_OVERALL_SCORE}"));
        }
    }
    let mut spans = Vec::with_capacity(record.spans.len());
    for (i, s) in record.spans.iter().enumerate() {
        let translation_range = CharRange::new(s.translation_start, s.translation_end)
            .map_err(|_| format!("span {i}: empty or inverted translation range"))?;
        let source_range = match (s.source_start, s.source_end) {
            (Some(a), Some(b)) => {
                Some(CharRange::new(a, b).map_err(|_| format!("span {i}: empty or inverted source range"))?)
            }
            (None, None) => None,
            _ => {
                return Err(format!(
                    "span {i}: source_start and source_end must both be set or both null"
                ))
            }
        };
        spans.push(ErrorSpan {
            span_id: SpanId::new(i.to_string()),
            category: s.category,
            severity: s.severity,
            source_range,
            translation_range,
            explanation: String::new(),
            provenance: s.provenance,
        });
    }
    let violations = span_violations(
        &spans,
        code_point_length(&record.source_text),
        code_point_length(&record.corrected_text),
    );
    match violations.first() {
        None => Ok(()),
        Some(v) => Err(describe(v)),
    }
}

fn describe(v: &Violation) -> String {
    let rule = match v.rule {
        Rule::TranslationOutOfBounds => "translation range out of bounds",
        Rule::SourceOutOfBounds => "source range out of bounds",
        Rule::TranslationOverlap => "overlapping translation ranges",
        Rule::SourceOverlap => "overlapping source ranges",
        Rule::MissingSourceRange => "model span without source range",
        Rule::DuplicateSpanId => "duplicate span",
        Rule::PairMismatch => "pair mismatch",
        Rule::ScoreOutOfRange => "overall_score out of range",
    };
    let spans: Vec<&str> = v.span_ids.iter().map(SpanId::as_str).collect();
    format!("{rule} (span {} at {:?})", spans.join(" and "), v.indices)
}

fn validate_all(records: &[ExportRecord]) -> Result<(), ExportError> {
    for (record, r) in records.iter().enumerate() {
        validate_record(r).map_err(|rule| ExportError::Validation { record, rule })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    format_version: &'static str,
    span_unit: &'static str,
    records: &'a [ExportRecord],
}

#[derive(Deserialize)]
struct Document {
    records: Vec<ExportRecord>,
}

/// Serialize records as a single compact JSON document.
pub fn to_json(records: &[ExportRecord]) -> Result<String, ExportError> {
    validate_all(records)?;
    let doc = DocumentRef {
        format_version: FORMAT_VERSION,
        span_unit: SPAN_UNIT,
        records,
    };
    Ok(serde_json::to_string(&doc).expect("export records serialize"))
}

pub fn from_json(document: &str) -> Result<Vec<ExportRecord>, ExportError> {
    let value: Value = serde_json::from_str(document).map_err(|e| ExportError::Malformed(e.to_string()))?;
    match value.get("format_version").and_then(Value::as_str) {
        Some(FORMAT_VERSION) => {}
        Some(other) => return Err(ExportError::Version(other.to_string())),
        None => return Err(ExportError::Malformed("missing format_version".into())),
    }
    if let Some(unit) = value.get("span_unit") {
        if unit.as_str() != Some(SPAN_UNIT) {
            return Err(ExportError::Malformed(format!("unsupported span_unit {unit}")));
        }
    }
    let doc: Document = serde_json::from_value(value).map_err(|e| ExportError::Malformed(e.to_string()))?;
    validate_all(&doc.records)?;
    Ok(doc.records)
}

/// RFC 4180 CSV, one row per span, CRLF line endings.
pub fn to_csv(records: &[ExportRecord]) -> Result<String, ExportError> {
    validate_all(records)?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    let io = |e: csv::Error| ExportError::Malformed(e.to_string());
    writer.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        let score = r.overall_score.map(|s| s.to_string()).unwrap_or_default();
        let head = [
            r.pair_id.as_str(),
            &r.source_lang,
            &r.target_lang,
            &r.source_text,
            &r.mt_text,
            &r.corrected_text,
            &r.annotator_id,
            &score,
        ];
        if r.spans.is_empty() {
            writer.write_record(head.iter().copied().chain([""; 8])).map_err(io)?;
            continue;
        }
        for s in &r.spans {
            let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            let tail = [
                s.category.as_str().to_string(),
                s.severity.as_str().to_string(),
                opt(s.source_start),
                opt(s.source_end),
                s.translation_start.to_string(),
                s.translation_end.to_string(),
                s.explanation.clone(),
                s.provenance.as_str().to_string(),
            ];
            writer
                .write_record(head.iter().copied().chain(tail.iter().map(String::as_str)))
                .map_err(io)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| ExportError::Malformed(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_record() -> ExportRecord {
        ExportRecord {
            pair_id: "p1".into(),
            source_lang: "en".into(),
            target_lang: "ja".into(),
            source_text: "Today Romani is spoken by small groups in 42 European countries.".into(),
            mt_text: "Todayen Romani は欧州の42か国で小グループで語られています.".into(),
            corrected_text: "Todayen Romani は欧州の42か国で小グループで語られています.".into(),
            annotator_id: "a1".into(),
            overall_score: None,
            spans: vec![ExportSpan {
                category: ErrorCategory::Spelling,
                severity: Severity::Minor,
                source_start: Some(0),
                source_end: Some(5),
                translation_start: 0,
                translation_end: 7,
                explanation: "The word 'Today' is incorrectly rendered as 'Todayen'...".into(),
                provenance: Provenance::Model,
            }],
        }
    }

    #[test]
    fn empty_document() {
        assert_eq!(
            to_json(&[]).unwrap(),
            r#"{"format_version":"1.0","span_unit":"unicode_code_point","records":[]}"#
        );
        assert_eq!(to_csv(&[]).unwrap(), format!("{}\r\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn json_carries_span_fields_in_order() {
        let json = to_json(&[reference_record()]).unwrap();
        assert!(json.contains(r#""category":"Spelling""#));
        assert!(json.contains(r#""translation_end":7"#));
        assert!(json.contains(r#""overall_score":null"#));
        let keys = [
            "\"pair_id\"",
            "\"source_lang\"",
            "\"target_lang\"",
            "\"source_text\"",
            "\"mt_text\"",
            "\"corrected_text\"",
            "\"annotator_id\"",
            "\"overall_score\"",
            "\"spans\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(from_json(&json).unwrap(), vec![reference_record()]);
    }

    #[test]
    fn spanless_record() {
        let mut r = reference_record();
        r.spans.clear();
        let json = to_json(std::slice::from_ref(&r)).unwrap();
        assert!(json.contains(r#""spans":[]"#));
        let csv = to_csv(&[r]).unwrap();
        let rows: Vec<&str> = csv.split_terminator("\r\n").collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].ends_with(",,,,,,,,,"));
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut r = reference_record();
        r.source_text = "Hello, world \"quoted\"".into();
        r.spans[0].explanation = "line1\nline2".into();
        r.spans[0].source_start = Some(0);
        r.spans[0].source_end = Some(5);
        let csv = to_csv(&[r]).unwrap();
        assert!(csv.contains("\"Hello, world \"\"quoted\"\"\""));
        assert!(csv.contains("\"line1\nline2\""));
    }

    #[test]
    fn version_checked() {
        let doc = r#"{"format_version":"9.9","records":[]}"#;
        assert_eq!(from_json(doc).unwrap_err(), ExportError::Version("9.9".into()));
    }

    #[test]
    fn overlap_rejected_at_record_index() {
        let mut bad = reference_record();
        let mut second = bad.spans[0].clone();
        second.source_start = Some(6);
        second.source_end = Some(12);
        second.translation_start = 3;
        second.translation_end = 9;
        bad.spans.push(second);
        let good = reference_record();
        let doc = format!(
            r#"{{"format_version":"1.0","records":[{},{}]}}"#,
            serde_json::to_string(&good).unwrap(),
            serde_json::to_string(&bad).unwrap()
        );
        match from_json(&doc).unwrap_err() {
            ExportError::Validation { record, rule } => {
                assert_eq!(record, 1);
                assert!(rule.contains("overlapping translation ranges"), "{rule}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(to_csv(&[bad]), Err(ExportError::Validation { record: 0, .. })));
    }

    #[test]
    fn half_open_source_pair_rejected() {
        let mut r = reference_record();
        r.spans[0].source_end = None;
        assert!(validate_record(&r).is_err());
    }
}
