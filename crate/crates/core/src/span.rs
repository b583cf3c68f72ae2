//! Error-span vocabulary: categories, severities, ranges and the span record.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ParseLabelError, SpanError};
use crate::text::code_point_length;

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        /// Case-insensitive; surrounding whitespace is ignored.
        impl FromStr for $name {
            type Err = ParseLabelError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let wanted = s.trim();
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str().eq_ignore_ascii_case(wanted))
                    .ok_or_else(|| ParseLabelError { kind: $kind, value: s.to_string() })
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(deserializer)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

label_enum! {
    /// The eight-label error taxonomy, a simplification of MQM.
    ErrorCategory, "error category" {
        Addition => "Addition",
        Omission => "Omission",
        Mistranslation => "Mistranslation",
        Untranslated => "Untranslated",
        Grammar => "Grammar",
        Spelling => "Spelling",
        Typography => "Typography",
        Unintelligible => "Unintelligible",
    }
}

label_enum! {
    /// Ordered so that `Major > Minor`.
    Severity, "severity" {
        Minor => "Minor",
        Major => "Major",
    }
}

label_enum! {
    /// Who produced a span.
    Provenance, "provenance" {
        Model => "model",
        Human => "human",
        HumanEditedModel => "human_edited_model",
    }
}

/// Opaque span identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpanId(String);

impl SpanId {
    pub fn new(id: impl Into<String>) -> Self {
        SpanId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SpanId {
    fn from(s: &str) -> Self {
        SpanId(s.to_string())
    }
}

/// Non-empty half-open range `[start, end)` of code points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr", into = "RangeRepr")]
pub struct CharRange {
    start: usize,
    end: usize,
}

#[derive(Serialize, Deserialize)]
struct RangeRepr {
    start: usize,
    end: usize,
}

impl TryFrom<RangeRepr> for CharRange {
    type Error = SpanError;

    fn try_from(r: RangeRepr) -> Result<Self, Self::Error> {
        CharRange::new(r.start, r.end)
    }
}

impl From<CharRange> for RangeRepr {
    fn from(r: CharRange) -> Self {
        RangeRepr {
            start: r.start,
            end: r.end,
        }
    }
}

impl CharRange {
    pub fn new(start: usize, end: usize) -> Result<Self, SpanError> {
        if start < end {
            Ok(CharRange { start, end })
        } else {
            Err(SpanError::InvalidRange { start, end })
        }
    }

    pub fn start(self) -> usize {
        self.start
    }

    pub fn end(self) -> usize {
        self.end
    }

    pub fn len(self) -> usize {
        self.end - self.start
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(self) -> bool {
        false
    }

    pub fn overlaps(self, other: CharRange) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn check_bounds(self, text: &str) -> Result<(), SpanError> {
        let len = code_point_length(text);
        if self.end > len {
            return Err(SpanError::OutOfBounds { index: self.end, len });
        }
        Ok(())
    }
}

impl fmt::Display for CharRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A typed, severity-graded error region.
///
/// `translation_range` indexes the translation (the corrected text once an
/// annotation exists); `source_range` indexes the source sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSpan {
    pub span_id: SpanId,
    pub category: ErrorCategory,
    pub severity: Severity,
    #[serde(default)]
    pub source_range: Option<CharRange>,
    pub translation_range: CharRange,
    #[serde(default)]
    pub explanation: String,
    pub provenance: Provenance,
}

/// Replace `target` with `replacement`. Unlike span ranges, the target may
/// be empty (`start == end`), which makes the splice a pure insertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splice {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

impl Splice {
    pub fn new(start: usize, end: usize, replacement: impl Into<String>) -> Result<Self, SpanError> {
        if start > end {
            return Err(SpanError::InvalidRange { start, end });
        }
        Ok(Splice {
            start,
            end,
            replacement: replacement.into(),
        })
    }

    pub fn insert(at: usize, text: impl Into<String>) -> Self {
        Splice {
            start: at,
            end: at,
            replacement: text.into(),
        }
    }

    /// Net change in code-point length caused by this splice.
    pub fn delta(&self) -> isize {
        code_point_length(&self.replacement) as isize - (self.end - self.start) as isize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_parse_is_closed_and_case_insensitive() {
        assert_eq!(ErrorCategory::ALL.len(), 8);
        assert_eq!("spelling".parse::<ErrorCategory>().unwrap(), ErrorCategory::Spelling);
        assert_eq!(
            " UNTRANSLATED ".parse::<ErrorCategory>().unwrap(),
            ErrorCategory::Untranslated
        );
        assert!("Style".parse::<ErrorCategory>().is_err());
        assert!("Fluency".parse::<ErrorCategory>().is_err());
        let json = serde_json::to_string(&ErrorCategory::Mistranslation).unwrap();
        assert_eq!(json, "\"Mistranslation\"");
        assert!(serde_json::from_str::<ErrorCategory>("\"Terminology\"").is_err());
    }

    #[test]
    fn severity_is_canonical_on_output() {
        let s: Severity = serde_json::from_str("\"MAJOR\"").unwrap();
        assert_eq!(s, Severity::Major);
        assert_eq!(serde_json::to_string(&s).unwrap(), "\"Major\"");
        assert!(Severity::Major > Severity::Minor);
        assert!("critical".parse::<Severity>().is_err());
    }

    #[test]
    fn empty_and_inverted_ranges_rejected() {
        assert!(CharRange::new(3, 3).is_err());
        assert!(CharRange::new(4, 3).is_err());
        assert!(serde_json::from_str::<CharRange>(r#"{"start":2,"end":2}"#).is_err());
        let r: CharRange = serde_json::from_str(r#"{"start":2,"end":5}"#).unwrap();
        assert_eq!((r.start(), r.end(), r.len()), (2, 5, 3));
    }

    #[test]
    fn overlap_is_half_open() {
        let a = CharRange::new(0, 5).unwrap();
        assert!(a.overlaps(CharRange::new(3, 8).unwrap()));
        assert!(!a.overlaps(CharRange::new(5, 8).unwrap()));
        assert!(a.overlaps(CharRange::new(1, 2).unwrap()));
    }

    #[test]
    fn splice_delta() {
        assert_eq!(Splice::new(0, 5, "hi").unwrap().delta(), -3);
        assert_eq!(Splice::insert(2, "日本").delta(), 2);
        assert!(Splice::new(3, 2, "").is_err());
    }
}
