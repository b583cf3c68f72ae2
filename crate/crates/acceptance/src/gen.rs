//! Random valid inputs for the acceptance criteria.

use postedit_core::export::ExportRecord;
use postedit_core::{
    code_point_length, Annotation, CharRange, ErrorCategory, ErrorSpan, PairStatus, Provenance, Severity, SpanId,
    Splice, TranslationPair,
};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Mix of ASCII, Latin with diacritics, CJK, emoji (outside the BMP), a
/// combining mark, and CSV-hostile characters.
pub const ALPHABET: &[char] = &[
    'a', 'b', 'z', ' ', ' ', 'é', 'ß', '日', '本', '語', '欧', '州', '😀', '🌅', '\u{301}', ',', '"', '\n',
];

pub fn text<R: Rng>(rng: &mut R, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    (0..n)
        .map(|_| *ALPHABET.choose(rng).expect("alphabet is not empty"))
        .collect()
}

/// Up to `max` pairwise disjoint, non-empty ranges inside `[0, len)`.
pub fn disjoint_ranges<R: Rng>(rng: &mut R, len: usize, max: usize) -> Vec<CharRange> {
    let mut cuts: Vec<usize> = (0..2 * rng.random_range(0..=max))
        .map(|_| rng.random_range(0..=len))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    cuts.chunks_exact(2)
        .filter_map(|w| CharRange::new(w[0], w[1]).ok())
        .collect()
}

pub fn pair<R: Rng>(rng: &mut R) -> TranslationPair {
    TranslationPair {
        pair_id: format!("p{}", rng.random_range(0..1_000_000u32)),
        dataset_id: "acceptance".into(),
        source_lang: "en".into(),
        target_lang: ["ja", "de", "zh"].choose(rng).expect("non-empty").to_string(),
        source_text: format!("s{}", text(rng, 0, 24)),
        mt_text: format!("m{}", text(rng, 0, 32)),
        status: PairStatus::Pending,
    }
}

/// A pair and a valid annotation over it. The corrected text is the MT text
/// or, half of the time, an unrelated string.
pub fn annotated<R: Rng>(rng: &mut R) -> (TranslationPair, Annotation) {
    let pair = pair(rng);
    let mut annotation = Annotation::draft(&pair, format!("annotator{}", rng.random_range(0..5)));
    if rng.random_bool(0.5) {
        annotation.corrected_text = format!("c{}", text(rng, 0, 32));
    }
    let translation = disjoint_ranges(rng, code_point_length(&annotation.corrected_text), 6);
    let source = disjoint_ranges(rng, code_point_length(&pair.source_text), 6);
    annotation.spans = translation
        .into_iter()
        .enumerate()
        .map(|(i, translation_range)| {
            let source_range = source.get(i).copied().filter(|_| rng.random_bool(0.7));
            let provenance = match source_range {
                Some(_) => *Provenance::ALL.choose(rng).expect("non-empty"),
                None => *[Provenance::Human, Provenance::HumanEditedModel]
                    .choose(rng)
                    .expect("non-empty"),
            };
            ErrorSpan {
                span_id: SpanId::new(format!("s{i}")),
                category: *ErrorCategory::ALL.choose(rng).expect("non-empty"),
                severity: *Severity::ALL.choose(rng).expect("non-empty"),
                source_range,
                translation_range,
                explanation: text(rng, 0, 12),
                provenance,
            }
        })
        .collect();
    annotation.overall_score = rng.random_bool(0.8).then(|| rng.random_range(0..=100));
    (pair, annotation)
}

/// A splice with in-bounds, possibly empty, region of `text`.
pub fn splice<R: Rng>(rng: &mut R, text_: &str) -> Splice {
    let len = code_point_length(text_);
    let a = rng.random_range(0..=len);
    let b = rng.random_range(0..=len);
    let replacement = if rng.random_bool(0.2) {
        String::new()
    } else {
        text(rng, 1, 6)
    };
    Splice::new(a.min(b), a.max(b), replacement).expect("ordered, in-bounds splice")
}

pub fn export_record<R: Rng>(rng: &mut R) -> ExportRecord {
    let (pair, annotation) = annotated(rng);
    ExportRecord::from_annotation(&pair, &annotation)
}
