//! Code-point arithmetic over Unicode text.
//!
//! Every index handled by this crate counts Unicode scalar values (code
//! points). Bytes and UTF-16 units never leak through these helpers.

use crate::error::SpanError;
use crate::span::CharRange;

/// Number of code points in `text`.
pub fn code_point_length(text: &str) -> usize {
    text.chars().count()
}

/// Byte offset of the code point at `index`, or `text.len()` when `index`
/// equals the code-point length. Returns `None` past the end.
pub fn byte_offset(text: &str, index: usize) -> Option<usize> {
    let mut seen = 0;
    for (byte, _) in text.char_indices() {
        if seen == index {
            return Some(byte);
        }
        seen += 1;
    }
    (seen == index).then_some(text.len())
}

/// Byte range covering the code points `[start, end)`.
pub(crate) fn byte_range(text: &str, start: usize, end: usize) -> Result<(usize, usize), SpanError> {
    let len = code_point_length(text);
    if start > len {
        return Err(SpanError::OutOfBounds { index: start, len });
    }
    if end > len {
        return Err(SpanError::OutOfBounds { index: end, len });
    }
    if start > end {
        return Err(SpanError::InvalidRange { start, end });
    }
    // both offsets exist because they were bounds-checked above
    let lo = byte_offset(text, start).unwrap_or(text.len());
    let hi = byte_offset(text, end).unwrap_or(text.len());
    Ok((lo, hi))
}

/// The code-point slice `[range.start, range.end)` of `text`.
pub fn extract_span_text(text: &str, range: CharRange) -> Result<&str, SpanError> {
    let (lo, hi) = byte_range(text, range.start(), range.end())?;
    Ok(&text[lo..hi])
}

/// Code-point index of the first occurrence of `needle` in `haystack`.
pub fn find_code_point(haystack: &str, needle: &str) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    haystack.find(needle).map(|byte| code_point_length(&haystack[..byte]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_count_code_points() {
        assert_eq!(code_point_length("Today"), 5);
        assert_eq!(code_point_length(""), 0);
        assert_eq!(code_point_length("日本語"), 3);
        // one code point per char, regardless of UTF-8/UTF-16 width
        assert_eq!(code_point_length("a😀b"), 3);
        // combining mark counts separately from its base
        assert_eq!(code_point_length("e\u{301}"), 2);
    }

    #[test]
    fn extracts_code_point_slices() {
        let src = "Today Romani is spoken by small groups in 42 European countries.";
        let mt = "Todayen Romani は欧州の42か国で小グループで語られています.";
        assert_eq!(extract_span_text(src, CharRange::new(0, 5).unwrap()).unwrap(), "Today");
        assert_eq!(extract_span_text(mt, CharRange::new(0, 7).unwrap()).unwrap(), "Todayen");
        assert_eq!(extract_span_text("abc", CharRange::new(0, 3).unwrap()).unwrap(), "abc");
        assert_eq!(extract_span_text(mt, CharRange::new(16, 18).unwrap()).unwrap(), "欧州");
    }

    #[test]
    fn out_of_bounds_names_index() {
        let err = extract_span_text("abc", CharRange::new(1, 4).unwrap()).unwrap_err();
        assert_eq!(err, SpanError::OutOfBounds { index: 4, len: 3 });
    }

    #[test]
    fn byte_offsets() {
        assert_eq!(byte_offset("日本", 0), Some(0));
        assert_eq!(byte_offset("日本", 1), Some(3));
        assert_eq!(byte_offset("日本", 2), Some(6));
        assert_eq!(byte_offset("日本", 3), None);
        assert_eq!(byte_offset("", 0), Some(0));
    }

    #[test]
    fn finds_by_code_point() {
        assert_eq!(find_code_point("欧州の42か国", "42"), Some(3));
        assert_eq!(find_code_point("abc", "x"), None);
        assert_eq!(find_code_point("abc", ""), None);
    }
}
