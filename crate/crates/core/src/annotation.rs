//! Translation pairs, annotations, and the span editing operations that keep
//! annotations valid while the corrected text changes underneath them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{ParseLabelError, SpanError};
use crate::span::{CharRange, ErrorSpan, Provenance, SpanId, Splice};
use crate::text::{byte_range, code_point_length};

/// Workflow state of a pair. Ordered: `Pending < InProgress < Completed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Pending,
    InProgress,
    Completed,
}

impl PairStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PairStatus::Pending => "pending",
            PairStatus::InProgress => "in_progress",
            PairStatus::Completed => "completed",
        }
    }

    /// Forward-only transition; moving backward requires an explicit reset.
    pub fn advance(self, to: PairStatus) -> PairStatus {
        self.max(to)
    }
}

impl fmt::Display for PairStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairStatus {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pending" => Ok(PairStatus::Pending),
            "in_progress" => Ok(PairStatus::InProgress),
            "completed" => Ok(PairStatus::Completed),
            _ => Err(ParseLabelError {
                kind: "status",
                value: s.to_string(),
            }),
        }
    }
}

/// A source sentence and its precomputed machine translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationPair {
    pub pair_id: String,
    pub dataset_id: String,
    pub source_lang: String,
    pub target_lang: String,
    pub source_text: String,
    pub mt_text: String,
    pub status: PairStatus,
}

impl TranslationPair {
    /// Field-level problems with this pair, empty when it is well formed.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, value) in [
            ("pair_id", &self.pair_id),
            ("dataset_id", &self.dataset_id),
            ("source_lang", &self.source_lang),
            ("target_lang", &self.target_lang),
            ("source_text", &self.source_text),
            ("mt_text", &self.mt_text),
        ] {
            if value.is_empty() {
                out.push(format!("{name} must not be empty"));
            }
        }
        out
    }

    /// Same content, ignoring workflow status.
    pub fn same_content(&self, other: &TranslationPair) -> bool {
        self.pair_id == other.pair_id
            && self.dataset_id == other.dataset_id
            && self.source_lang == other.source_lang
            && self.target_lang == other.target_lang
            && self.source_text == other.source_text
            && self.mt_text == other.mt_text
    }
}

/// One annotator's corrected text and final span set for a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub pair_id: String,
    pub annotator_id: String,
    pub corrected_text: String,
    pub spans: Vec<ErrorSpan>,
    #[serde(default)]
    pub overall_score: Option<u8>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub version: u64,
}

impl Annotation {
    /// Fresh draft: the corrected text starts as the machine translation.
    pub fn draft(pair: &TranslationPair, annotator_id: impl Into<String>) -> Self {
        let now = Utc::now();
        Annotation {
            pair_id: pair.pair_id.clone(),
            annotator_id: annotator_id.into(),
            corrected_text: pair.mt_text.clone(),
            spans: Vec::new(),
            overall_score: None,
            created_at: now,
            updated_at: now,
            version: 0,
        }
    }

    pub fn span(&self, id: &SpanId) -> Option<&ErrorSpan> {
        self.spans.iter().find(|s| &s.span_id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    PairMismatch,
    DuplicateSpanId,
    TranslationOutOfBounds,
    SourceOutOfBounds,
    TranslationOverlap,
    SourceOverlap,
    MissingSourceRange,
    ScoreOutOfRange,
}

/// One broken invariant, with the spans and indices involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub span_ids: Vec<SpanId>,
    pub indices: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.span_ids.iter().map(SpanId::as_str).collect();
        write!(
            f,
            "{:?} spans=[{}] indices={:?}",
            self.rule,
            ids.join(","),
            self.indices
        )
    }
}

pub const MAX_OVERALL_SCORE: u8 = 100;

/// Check every annotation and span invariant against `pair`.
///
/// Translation ranges are checked against `corrected_text`, source ranges
/// against `pair.source_text`. An empty result means the annotation is valid.
pub fn validate_annotation(annotation: &Annotation, pair: &TranslationPair) -> Vec<Violation> {
    let mut out = Vec::new();
    if annotation.pair_id != pair.pair_id {
        out.push(Violation {
            rule: Rule::PairMismatch,
            span_ids: vec![],
            indices: vec![],
        });
    }
    if let Some(score) = annotation.overall_score {
        if score > MAX_OVERALL_SCORE {
            out.push(Violation {
                rule: Rule::ScoreOutOfRange,
                span_ids: vec![],
                indices: vec![score as usize],
            });
        }
    }
    out.extend(span_violations(
        &annotation.spans,
        code_point_length(&pair.source_text),
        code_point_length(&annotation.corrected_text),
    ));
    out
}

/// Span-level invariants for a span list over texts of the given code-point
/// lengths.
pub fn span_violations(spans: &[ErrorSpan], source_len: usize, translation_len: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for span in spans {
        if !seen.insert(&span.span_id) {
            out.push(Violation {
                rule: Rule::DuplicateSpanId,
                span_ids: vec![span.span_id.clone()],
                indices: vec![],
            });
        }
        let t = span.translation_range;
        if t.end() > translation_len {
            out.push(Violation {
                rule: Rule::TranslationOutOfBounds,
                span_ids: vec![span.span_id.clone()],
                indices: vec![t.start(), t.end(), translation_len],
            });
        }
        match span.source_range {
            Some(s) if s.end() > source_len => out.push(Violation {
                rule: Rule::SourceOutOfBounds,
                span_ids: vec![span.span_id.clone()],
                indices: vec![s.start(), s.end(), source_len],
            }),
            None if span.provenance == Provenance::Model => out.push(Violation {
                rule: Rule::MissingSourceRange,
                span_ids: vec![span.span_id.clone()],
                indices: vec![],
            }),
            _ => {}
        }
    }
    for (i, a) in spans.iter().enumerate() {
        for b in &spans[i + 1..] {
            if a.translation_range.overlaps(b.translation_range) {
                out.push(overlap(
                    Rule::TranslationOverlap,
                    a,
                    b,
                    a.translation_range,
                    b.translation_range,
                ));
            }
            if let (Some(sa), Some(sb)) = (a.source_range, b.source_range) {
                if sa.overlaps(sb) {
                    out.push(overlap(Rule::SourceOverlap, a, b, sa, sb));
                }
            }
        }
    }
    out
}

fn overlap(rule: Rule, a: &ErrorSpan, b: &ErrorSpan, ra: CharRange, rb: CharRange) -> Violation {
    Violation {
        rule,
        span_ids: vec![a.span_id.clone(), b.span_id.clone()],
        indices: vec![ra.start().max(rb.start()), ra.end().min(rb.end())],
    }
}

/// Insert `span`, or replace the span that has the same id.
///
/// Replacing a model span with anything different marks it
/// `human_edited_model`. The whole operation is rejected if the result
/// would violate any invariant.
pub fn upsert_span(
    annotation: &Annotation,
    pair: &TranslationPair,
    mut span: ErrorSpan,
) -> Result<Annotation, SpanError> {
    span.translation_range.check_bounds(&annotation.corrected_text)?;
    if let Some(src) = span.source_range {
        src.check_bounds(&pair.source_text)?;
    }

    let existing = annotation.spans.iter().position(|s| s.span_id == span.span_id);
    if let Some(idx) = existing {
        let old = &annotation.spans[idx];
        if old.provenance != Provenance::Human && *old != span {
            span.provenance = Provenance::HumanEditedModel;
        }
    }

    let conflicting: Vec<SpanId> = annotation
        .spans
        .iter()
        .filter(|other| other.span_id != span.span_id)
        .filter(|other| {
            other.translation_range.overlaps(span.translation_range)
                || matches!((other.source_range, span.source_range), (Some(a), Some(b)) if a.overlaps(b))
        })
        .map(|other| other.span_id.clone())
        .collect();
    if !conflicting.is_empty() {
        return Err(SpanError::Overlap { conflicting });
    }

    let mut next = annotation.clone();
    match existing {
        Some(idx) => next.spans[idx] = span,
        None => next.spans.push(span),
    }
    let violations = validate_annotation(&next, pair);
    if violations.is_empty() {
        Ok(next)
    } else {
        Err(SpanError::Invalid(violations))
    }
}

pub fn delete_span(annotation: &Annotation, span_id: &SpanId) -> Result<Annotation, SpanError> {
    let idx = annotation
        .spans
        .iter()
        .position(|s| &s.span_id == span_id)
        .ok_or_else(|| SpanError::NotFound(span_id.clone()))?;
    let mut next = annotation.clone();
    next.spans.remove(idx);
    Ok(next)
}

/// Result of [`apply_edit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditOutcome {
    pub annotation: Annotation,
    pub dropped: Vec<SpanId>,
    pub truncated: Vec<SpanId>,
}

/// What happens to one translation range under a splice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reanchor {
    Kept(CharRange),
    Truncated(CharRange),
    Dropped,
}

/// Re-anchor a single range across `splice` (code-point indices).
///
/// * ends at or before the splice: unchanged
/// * starts at or after the splice end: shifted by the splice delta
/// * inside the replaced region: dropped
/// * straddles one splice boundary: truncated to the part outside the
///   replaced region, shifted if that part follows the splice
/// * splice strictly inside the range: the range stretches over the
///   replacement text
pub fn reanchor(range: CharRange, splice: &Splice) -> Reanchor {
    let (a, b) = (range.start(), range.end());
    let (s, e) = (splice.start, splice.end);
    let inserted = code_point_length(&splice.replacement);
    let shift = |i: usize| i + inserted - (e - s).min(i + inserted);

    if b <= s {
        return Reanchor::Kept(range);
    }
    if a >= e {
        // a >= e >= s so a + inserted - (e - s) is non-negative
        let start = a + inserted - (e - s);
        let end = b + inserted - (e - s);
        return Reanchor::Kept(CharRange::new(start, end).expect("shift preserves length"));
    }
    if s <= a && b <= e {
        return Reanchor::Dropped;
    }
    if a < s && e < b {
        let end = shift(b);
        return Reanchor::Kept(CharRange::new(a, end).expect("interior splice keeps a prefix"));
    }
    if a < s {
        // a < s < b <= e
        return Reanchor::Truncated(CharRange::new(a, s).expect("a < s"));
    }
    // s <= a < e < b: surviving tail [e, b) moves to just after the replacement
    let start = s + inserted;
    let end = start + (b - e);
    Reanchor::Truncated(CharRange::new(start, end).expect("tail is non-empty"))
}

/// Apply `splice` to the corrected text and re-anchor every translation
/// range. Source ranges are untouched. A splice that rewrites a region with
/// identical text leaves the annotation unchanged.
pub fn apply_edit(annotation: &Annotation, splice: &Splice) -> Result<EditOutcome, SpanError> {
    let (lo, hi) = byte_range(&annotation.corrected_text, splice.start, splice.end)?;
    let mut outcome = EditOutcome {
        annotation: annotation.clone(),
        dropped: Vec::new(),
        truncated: Vec::new(),
    };
    if annotation.corrected_text[lo..hi] == splice.replacement {
        return Ok(outcome);
    }

    let next = &mut outcome.annotation;
    next.corrected_text.replace_range(lo..hi, &splice.replacement);
    let mut spans = Vec::with_capacity(annotation.spans.len());
    for span in &annotation.spans {
        match reanchor(span.translation_range, splice) {
            Reanchor::Kept(range) => spans.push(ErrorSpan {
                translation_range: range,
                ..span.clone()
            }),
            Reanchor::Truncated(range) => {
                outcome.truncated.push(span.span_id.clone());
                spans.push(ErrorSpan {
                    translation_range: range,
                    ..span.clone()
                });
            }
            Reanchor::Dropped => outcome.dropped.push(span.span_id.clone()),
        }
    }
    next.spans = spans;
    Ok(outcome)
}

/// Union of model and human spans; a model span that overlaps any human span
/// on either side is discarded. Output is ordered by translation range.
pub fn merge_suggestions(model_spans: &[ErrorSpan], human_spans: &[ErrorSpan]) -> Vec<ErrorSpan> {
    let human_ids: HashSet<&SpanId> = human_spans.iter().map(|s| &s.span_id).collect();
    let mut merged: Vec<ErrorSpan> = human_spans.to_vec();
    for m in model_spans {
        let collides = human_ids.contains(&m.span_id)
            || human_spans.iter().any(|h| {
                h.translation_range.overlaps(m.translation_range)
                    || matches!((h.source_range, m.source_range), (Some(a), Some(b)) if a.overlaps(b))
            });
        if !collides {
            merged.push(m.clone());
        }
    }
    merged.sort_by(|x, y| {
        x.translation_range
            .cmp(&y.translation_range)
            .then_with(|| x.span_id.cmp(&y.span_id))
    });
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::{ErrorCategory, Severity};

    fn pair(source: &str, mt: &str) -> TranslationPair {
        TranslationPair {
            pair_id: "p1".into(),
            dataset_id: "d1".into(),
            source_lang: "en".into(),
            target_lang: "ja".into(),
            source_text: source.into(),
            mt_text: mt.into(),
            status: PairStatus::Pending,
        }
    }

    fn span(id: &str, t: (usize, usize)) -> ErrorSpan {
        ErrorSpan {
            span_id: id.into(),
            category: ErrorCategory::Grammar,
            severity: Severity::Minor,
            source_range: None,
            translation_range: CharRange::new(t.0, t.1).unwrap(),
            explanation: String::new(),
            provenance: Provenance::Human,
        }
    }

    fn annotated(text: &str, spans: Vec<ErrorSpan>) -> (TranslationPair, Annotation) {
        let p = pair("0123456789abcdef", text);
        let mut a = Annotation::draft(&p, "ann");
        a.spans = spans;
        (p, a)
    }

    #[test]
    fn valid_single_span() {
        let (p, a) = annotated("0123456789", vec![span("a", (0, 5))]);
        assert!(validate_annotation(&a, &p).is_empty());
    }

    #[test]
    fn overlap_names_both_spans() {
        let (p, a) = annotated("0123456789", vec![span("a", (0, 5)), span("b", (3, 8))]);
        let v = validate_annotation(&a, &p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::TranslationOverlap);
        assert_eq!(v[0].span_ids, vec![SpanId::from("a"), SpanId::from("b")]);
        assert_eq!(v[0].indices, vec![3, 5]);
    }

    #[test]
    fn out_of_bounds_by_one() {
        let (p, a) = annotated("0123456789", vec![span("a", (4, 11))]);
        let v = validate_annotation(&a, &p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::TranslationOutOfBounds);
        assert_eq!(v[0].indices, vec![4, 11, 10]);
    }

    #[test]
    fn model_span_needs_source_range() {
        let mut s = span("m", (0, 2));
        s.provenance = Provenance::Model;
        let (p, a) = annotated("0123456789", vec![s]);
        let v = validate_annotation(&a, &p);
        assert_eq!(v[0].rule, Rule::MissingSourceRange);
    }

    #[test]
    fn source_overlap_and_duplicates() {
        let mut x = span("x", (0, 2));
        x.source_range = Some(CharRange::new(0, 4).unwrap());
        let mut y = span("x", (3, 5));
        y.source_range = Some(CharRange::new(2, 6).unwrap());
        let (p, a) = annotated("0123456789", vec![x, y]);
        let rules: Vec<Rule> = validate_annotation(&a, &p).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec![Rule::DuplicateSpanId, Rule::SourceOverlap]);
    }

    #[test]
    fn score_and_pair_checks() {
        let (p, mut a) = annotated("0123456789", vec![]);
        a.overall_score = Some(101);
        a.pair_id = "other".into();
        let rules: Vec<Rule> = validate_annotation(&a, &p).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec![Rule::PairMismatch, Rule::ScoreOutOfRange]);
    }

    #[test]
    fn upsert_inserts_disjoint() {
        let (p, a) = annotated("0123456789", vec![span("a", (5, 7))]);
        let next = upsert_span(&a, &p, span("b", (2, 4))).unwrap();
        assert_eq!(next.spans.len(), 2);
    }

    #[test]
    fn upsert_rejects_overlap() {
        let (p, a) = annotated("0123456789", vec![span("a", (5, 7))]);
        let err = upsert_span(&a, &p, span("b", (6, 8))).unwrap_err();
        assert_eq!(
            err,
            SpanError::Overlap {
                conflicting: vec!["a".into()]
            }
        );
    }

    #[test]
    fn upsert_rejects_out_of_bounds() {
        let (p, a) = annotated("0123456789", vec![]);
        let err = upsert_span(&a, &p, span("b", (6, 12))).unwrap_err();
        assert_eq!(err, SpanError::OutOfBounds { index: 12, len: 10 });
    }

    #[test]
    fn editing_model_span_changes_provenance() {
        let mut m = span("m", (5, 7));
        m.provenance = Provenance::Model;
        m.source_range = Some(CharRange::new(0, 3).unwrap());
        let (p, a) = annotated("0123456789", vec![m.clone()]);

        // unchanged resubmission keeps provenance
        let same = upsert_span(&a, &p, m.clone()).unwrap();
        assert_eq!(same.spans[0].provenance, Provenance::Model);

        let mut edited = m;
        edited.severity = Severity::Major;
        let next = upsert_span(&a, &p, edited).unwrap();
        assert_eq!(next.spans.len(), 1);
        assert_eq!(next.spans[0].severity, Severity::Major);
        assert_eq!(next.spans[0].translation_range, CharRange::new(5, 7).unwrap());
        assert_eq!(next.spans[0].provenance, Provenance::HumanEditedModel);
    }

    #[test]
    fn replacing_a_span_may_move_over_its_old_position() {
        let (p, a) = annotated("0123456789", vec![span("a", (2, 5))]);
        let next = upsert_span(&a, &p, span("a", (3, 6))).unwrap();
        assert_eq!(next.spans[0].translation_range, CharRange::new(3, 6).unwrap());
    }

    #[test]
    fn delete() {
        let (_, a) = annotated("0123456789", vec![span("a", (0, 2))]);
        assert!(delete_span(&a, &"a".into()).unwrap().spans.is_empty());

        let (_, a) = annotated("0123456789", vec![span("a", (0, 2)), span("b", (4, 6))]);
        let next = delete_span(&a, &"a".into()).unwrap();
        assert_eq!(next.spans, vec![span("b", (4, 6))]);

        assert_eq!(
            delete_span(&a, &"zz".into()).unwrap_err(),
            SpanError::NotFound("zz".into())
        );
    }

    #[test]
    fn edit_shifts_following_span() {
        let (_, a) = annotated("hello world", vec![span("w", (6, 11))]);
        let out = apply_edit(&a, &Splice::new(0, 5, "hi").unwrap()).unwrap();
        assert_eq!(out.annotation.corrected_text, "hi world");
        assert_eq!(out.annotation.spans[0].translation_range, CharRange::new(3, 8).unwrap());
        assert!(out.dropped.is_empty() && out.truncated.is_empty());
    }

    #[test]
    fn edit_truncates_straddling_span() {
        let (_, a) = annotated("abcdef", vec![span("s", (2, 5))]);
        let out = apply_edit(&a, &Splice::new(3, 6, "XY").unwrap()).unwrap();
        assert_eq!(out.annotation.corrected_text, "abcXY");
        assert_eq!(out.annotation.spans[0].translation_range, CharRange::new(2, 3).unwrap());
        assert_eq!(out.truncated, vec![SpanId::from("s")]);
    }

    #[test]
    fn edit_drops_covered_span() {
        let (_, a) = annotated("abcdef", vec![span("s", (2, 4))]);
        let out = apply_edit(&a, &Splice::new(1, 5, "Z").unwrap()).unwrap();
        assert_eq!(out.annotation.corrected_text, "aZf");
        assert!(out.annotation.spans.is_empty());
        assert_eq!(out.dropped, vec![SpanId::from("s")]);
    }

    #[test]
    fn edit_truncates_leading_part() {
        // splice covers the head of the span: tail survives right after the replacement
        let (_, a) = annotated("abcdefgh", vec![span("s", (2, 6))]);
        let out = apply_edit(&a, &Splice::new(1, 4, "XYZW").unwrap()).unwrap();
        assert_eq!(out.annotation.corrected_text, "aXYZWefgh");
        assert_eq!(out.annotation.spans[0].translation_range, CharRange::new(5, 7).unwrap());
        assert_eq!(out.truncated, vec![SpanId::from("s")]);
    }

    #[test]
    fn edit_inside_span_stretches_it() {
        let (_, a) = annotated("abcdefgh", vec![span("s", (1, 7))]);
        let out = apply_edit(&a, &Splice::new(3, 4, "日本語").unwrap()).unwrap();
        assert_eq!(out.annotation.corrected_text, "abc日本語efgh");
        assert_eq!(out.annotation.spans[0].translation_range, CharRange::new(1, 9).unwrap());
        assert!(out.truncated.is_empty());
    }

    #[test]
    fn insertion_at_span_edges() {
        let (_, a) = annotated("abcdef", vec![span("s", (2, 4))]);
        let at_start = apply_edit(&a, &Splice::insert(2, "xx")).unwrap();
        assert_eq!(
            at_start.annotation.spans[0].translation_range,
            CharRange::new(4, 6).unwrap()
        );
        let at_end = apply_edit(&a, &Splice::insert(4, "xx")).unwrap();
        assert_eq!(
            at_end.annotation.spans[0].translation_range,
            CharRange::new(2, 4).unwrap()
        );
    }

    #[test]
    fn identity_splice_is_noop() {
        let (_, a) = annotated("abcdef", vec![span("s", (2, 4))]);
        let out = apply_edit(&a, &Splice::new(1, 5, "bcde").unwrap()).unwrap();
        assert_eq!(out.annotation, a);
        assert!(out.dropped.is_empty());
    }

    #[test]
    fn edit_out_of_bounds() {
        let (_, a) = annotated("abc", vec![]);
        let err = apply_edit(&a, &Splice::new(2, 4, "").unwrap()).unwrap_err();
        assert_eq!(err, SpanError::OutOfBounds { index: 4, len: 3 });
    }

    #[test]
    fn source_ranges_survive_edits() {
        let mut s = span("s", (2, 4));
        s.source_range = Some(CharRange::new(1, 3).unwrap());
        let (_, a) = annotated("abcdef", vec![s]);
        let out = apply_edit(&a, &Splice::new(0, 1, "XYZ").unwrap()).unwrap();
        assert_eq!(
            out.annotation.spans[0].source_range,
            Some(CharRange::new(1, 3).unwrap())
        );
    }

    fn model(id: &str, t: (usize, usize)) -> ErrorSpan {
        ErrorSpan {
            provenance: Provenance::Model,
            ..span(id, t)
        }
    }

    #[test]
    fn merge_keeps_disjoint() {
        let out = merge_suggestions(&[model("m", (0, 5))], &[span("h", (10, 12))]);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn merge_prefers_human() {
        let out = merge_suggestions(&[model("m", (0, 5))], &[span("h", (3, 8))]);
        assert_eq!(out, vec![span("h", (3, 8))]);
    }

    #[test]
    fn merge_only_human() {
        let h = vec![span("h1", (0, 2)), span("h2", (4, 6))];
        assert_eq!(merge_suggestions(&[], &h), h);
    }

    #[test]
    fn merge_is_idempotent() {
        let m = vec![model("m1", (0, 3)), model("m2", (5, 9)), model("m3", (12, 14))];
        let h = vec![span("h1", (2, 4)), span("h2", (10, 11))];
        let once = merge_suggestions(&m, &h);
        assert_eq!(merge_suggestions(&once, &h), once);
    }

    #[test]
    fn status_only_moves_forward() {
        assert_eq!(
            PairStatus::Pending.advance(PairStatus::InProgress),
            PairStatus::InProgress
        );
        assert_eq!(
            PairStatus::Completed.advance(PairStatus::InProgress),
            PairStatus::Completed
        );
        assert_eq!("IN_PROGRESS".parse::<PairStatus>().unwrap(), PairStatus::InProgress);
    }
}
