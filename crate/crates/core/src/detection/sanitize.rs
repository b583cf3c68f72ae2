//! Turn untrusted detector output into valid [`ErrorSpan`]s.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::wire::RawDetectedSpan;
use crate::annotation::TranslationPair;
use crate::span::{CharRange, ErrorCategory, ErrorSpan, Provenance, Severity, SpanId};
use crate::text::{code_point_length, extract_span_text, find_code_point};

/// Translation ranges ending at most this far past the text are clamped.
pub const CLAMP_TOLERANCE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    UnknownErrorType,
    UnknownSeverity,
    SourceTextMismatch,
    InvalidTranslationRange,
    TranslationOutOfBounds,
    MultipleRepairs,
    Overlap,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::UnknownErrorType => "unknown error type",
            DropReason::UnknownSeverity => "unknown severity",
            DropReason::SourceTextMismatch => "source text mismatch",
            DropReason::InvalidTranslationRange => "invalid translation range",
            DropReason::TranslationOutOfBounds => "translation range out of bounds",
            DropReason::MultipleRepairs => "needs both relocation and clamping",
            DropReason::Overlap => "overlaps a higher-priority span",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedSpan {
    pub index: usize,
    pub reason: DropReason,
}

/// Counts refer to spans in the accepted output only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanitizationReport {
    pub accepted: usize,
    pub relocated: usize,
    pub clamped: usize,
    pub dropped: Vec<DroppedSpan>,
}

struct Candidate {
    index: usize,
    span: ErrorSpan,
    relocated: bool,
    clamped: bool,
}

/// Span id assigned to the raw span at `index`.
pub fn model_span_id(index: usize) -> SpanId {
    SpanId::new(format!("m{index}"))
}

/// Validate, repair, and de-overlap raw detector spans against `pair`.
///
/// Output spans are ordered by translation range and carry
/// `provenance = model`.
pub fn sanitize_spans(raw: &[RawDetectedSpan], pair: &TranslationPair) -> (Vec<ErrorSpan>, SanitizationReport) {
    let mut report = SanitizationReport::default();
    let mut candidates = Vec::new();
    for (index, r) in raw.iter().enumerate() {
        match candidate(index, r, pair) {
            Ok(c) => candidates.push(c),
            Err(reason) => report.dropped.push(DroppedSpan { index, reason }),
        }
    }

    // higher severity first, then earlier translation start, then input order
    candidates.sort_by_key(|c| (Reverse(c.span.severity), c.span.translation_range.start(), c.index));
    let mut kept: Vec<Candidate> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let clash = kept.iter().any(|k| {
            k.span.translation_range.overlaps(c.span.translation_range)
                || matches!((k.span.source_range, c.span.source_range), (Some(a), Some(b)) if a.overlaps(b))
        });
        if clash {
            report.dropped.push(DroppedSpan {
                index: c.index,
                reason: DropReason::Overlap,
            });
        } else {
            kept.push(c);
        }
    }
    report.dropped.sort_by_key(|d| d.index);
    kept.sort_by_key(|c| (c.span.translation_range, c.index));

    report.accepted = kept.len();
    report.relocated = kept.iter().filter(|c| c.relocated).count();
    report.clamped = kept.iter().filter(|c| c.clamped).count();
    (kept.into_iter().map(|c| c.span).collect(), report)
}

fn candidate(index: usize, r: &RawDetectedSpan, pair: &TranslationPair) -> Result<Candidate, DropReason> {
    let category: ErrorCategory = r.error_type.parse().map_err(|_| DropReason::UnknownErrorType)?;
    let severity: Severity = r.error_severity.parse().map_err(|_| DropReason::UnknownSeverity)?;

    let stated = range_from(r.start_index_orig, r.end_index_orig)
        .filter(|range| extract_span_text(&pair.source_text, *range).ok() == Some(r.original_text.as_str()));
    let (source_range, relocated) = match stated {
        Some(range) => (range, false),
        None => {
            let start = find_code_point(&pair.source_text, &r.original_text).ok_or(DropReason::SourceTextMismatch)?;
            let end = start + code_point_length(&r.original_text);
            (
                CharRange::new(start, end).map_err(|_| DropReason::SourceTextMismatch)?,
                true,
            )
        }
    };

    let mt_len = code_point_length(&pair.mt_text);
    let (start, end) = match (
        usize::try_from(r.start_index_translation),
        usize::try_from(r.end_index_translation),
    ) {
        (Ok(s), Ok(e)) if s < e => (s, e),
        _ => return Err(DropReason::InvalidTranslationRange),
    };
    let (end, clamped) = if end <= mt_len {
        (end, false)
    } else if end - mt_len <= CLAMP_TOLERANCE && start < mt_len {
        (mt_len, true)
    } else {
        return Err(DropReason::TranslationOutOfBounds);
    };
    if relocated && clamped {
        return Err(DropReason::MultipleRepairs);
    }
    let translation_range = CharRange::new(start, end).map_err(|_| DropReason::InvalidTranslationRange)?;

    Ok(Candidate {
        index,
        span: ErrorSpan {
            span_id: model_span_id(index),
            category,
            severity,
            source_range: Some(source_range),
            translation_range,
            explanation: r.correct_text.clone(),
            provenance: Provenance::Model,
        },
        relocated,
        clamped,
    })
}

fn range_from(start: i64, end: i64) -> Option<CharRange> {
    let start = usize::try_from(start).ok()?;
    let end = usize::try_from(end).ok()?;
    CharRange::new(start, end).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::PairStatus;

    fn pair(source: &str, mt: &str) -> TranslationPair {
        TranslationPair {
            pair_id: "p".into(),
            dataset_id: "d".into(),
            source_lang: "en".into(),
            target_lang: "fr".into(),
            source_text: source.into(),
            mt_text: mt.into(),
            status: PairStatus::Pending,
        }
    }

    fn raw(text: &str, ty: &str, sev: &str, orig: (i64, i64), tr: (i64, i64)) -> RawDetectedSpan {
        RawDetectedSpan {
            original_text: text.into(),
            error_type: ty.into(),
            error_severity: sev.into(),
            start_index_orig: orig.0,
            end_index_orig: orig.1,
            start_index_translation: tr.0,
            end_index_translation: tr.1,
            correct_text: "why".into(),
        }
    }

    #[test]
    fn keeps_major_over_minor() {
        let p = pair("abcdefghij", "0123456789");
        let spans = [
            raw("ab", "Grammar", "Minor", (0, 2), (0, 5)),
            raw("cd", "Spelling", "Major", (2, 4), (3, 8)),
        ];
        let (out, report) = sanitize_spans(&spans, &p);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].severity, Severity::Major);
        assert_eq!(out[0].span_id, SpanId::from("m1"));
        assert_eq!(
            report.dropped,
            vec![DroppedSpan {
                index: 0,
                reason: DropReason::Overlap
            }]
        );
        assert_eq!(report.accepted, 1);
    }

    #[test]
    fn equal_severity_prefers_earlier_start() {
        let p = pair("abcdefghij", "0123456789");
        let spans = [
            raw("cd", "Grammar", "Minor", (2, 4), (3, 8)),
            raw("ab", "Grammar", "Minor", (0, 2), (0, 5)),
        ];
        let (out, report) = sanitize_spans(&spans, &p);
        assert_eq!(out[0].translation_range, CharRange::new(0, 5).unwrap());
        assert_eq!(report.dropped[0].index, 0);
    }

    #[test]
    fn drops_text_absent_from_source() {
        let p = pair("abcdefghij", "0123456789");
        let (out, report) = sanitize_spans(&[raw("xyz", "Grammar", "Minor", (0, 3), (0, 3))], &p);
        assert!(out.is_empty());
        assert_eq!(report.dropped[0].reason, DropReason::SourceTextMismatch);
        assert_eq!(report.dropped[0].reason.as_str(), "source text mismatch");
    }

    #[test]
    fn relocates_miscounted_source() {
        let p = pair("le chat noir", "the black cat");
        let (out, report) = sanitize_spans(&[raw("chat", "Mistranslation", "Major", (2, 6), (10, 13))], &p);
        assert_eq!(out[0].source_range, Some(CharRange::new(3, 7).unwrap()));
        assert_eq!(report.relocated, 1);
    }

    #[test]
    fn clamps_small_overrun_only() {
        let p = pair("abc", "0123456789");
        let (out, report) = sanitize_spans(&[raw("a", "Grammar", "Minor", (0, 1), (8, 12))], &p);
        assert_eq!(out[0].translation_range, CharRange::new(8, 10).unwrap());
        assert_eq!(report.clamped, 1);

        let (out, report) = sanitize_spans(&[raw("a", "Grammar", "Minor", (0, 1), (8, 13))], &p);
        assert!(out.is_empty());
        assert_eq!(report.dropped[0].reason, DropReason::TranslationOutOfBounds);
    }

    #[test]
    fn unknown_labels_dropped() {
        let p = pair("abc", "0123456789");
        let spans = [
            raw("a", "Style", "Minor", (0, 1), (0, 1)),
            raw("a", "grammar", "critical", (0, 1), (0, 1)),
            raw("a", "GRAMMAR", "minor", (0, 1), (0, 1)),
        ];
        let (out, report) = sanitize_spans(&spans, &p);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].category, ErrorCategory::Grammar);
        let reasons: Vec<DropReason> = report.dropped.iter().map(|d| d.reason).collect();
        assert_eq!(reasons, vec![DropReason::UnknownErrorType, DropReason::UnknownSeverity]);
    }

    #[test]
    fn negative_or_inverted_translation_indices() {
        let p = pair("abc", "0123456789");
        let spans = [
            raw("a", "Grammar", "Minor", (0, 1), (-1, 2)),
            raw("b", "Grammar", "Minor", (1, 2), (4, 4)),
        ];
        let (out, report) = sanitize_spans(&spans, &p);
        assert!(out.is_empty());
        assert!(report
            .dropped
            .iter()
            .all(|d| d.reason == DropReason::InvalidTranslationRange));
    }

    #[test]
    fn source_side_overlap_also_resolved() {
        let p = pair("abcdef", "0123456789");
        let spans = [
            raw("abc", "Grammar", "Minor", (0, 3), (0, 2)),
            raw("bcd", "Grammar", "Major", (1, 4), (5, 7)),
        ];
        let (out, report) = sanitize_spans(&spans, &p);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].severity, Severity::Major);
        assert_eq!(report.dropped[0].index, 0);
    }
}
