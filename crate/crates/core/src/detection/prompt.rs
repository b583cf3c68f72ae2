use crate::annotation::TranslationPair;
use crate::span::{ErrorCategory, Severity};

/// Field names of one entry in the `error_spans` array, in wire order.
pub const WIRE_FIELDS: [&str; 8] = [
    "original_text",
    "error_type",
    "error_severity",
    "start_index_orig",
    "end_index_orig",
    "start_index_translation",
    "end_index_translation",
    "correct_text",
];

/// Build the linguist-persona prompt for an LLM error detector.
pub fn build_ec1_prompt(pair: &TranslationPair) -> String {
    let categories = ErrorCategory::ALL
        .iter()
        .map(|c| c.as_str())
        .collect::<Vec<_>>()
        .join(", ");
    let severities = Severity::ALL
        .iter()
        .map(|s| s.as_str())
        .collect::<Vec<_>>()
        .join(" or ");
    let schema_fields = WIRE_FIELDS
        .iter()
        .map(|f| match *f {
            "start_index_orig" | "end_index_orig" | "start_index_translation" | "end_index_translation" => {
                format!("      \"{f}\": <integer>")
            }
            _ => format!("      \"{f}\": \"<string>\""),
        })
        .collect::<Vec<_>>()
        .join(",\n");

    format!(
        "You are a professional linguist specializing in machine translation evaluation.\n\
         Compare the source sentence with its machine translation ({src_lang} -> {tgt_lang}) and detect fine-grained translation errors.\n\
         \n\
         Rules:\n\
         - Label every error with exactly one type from this taxonomy: {categories}.\n\
         - Assign every error a severity level: {severities}.\n\
         - Give precise, non-overlapping character-level spans in both the source and the translation.\n\
         - Use strict 0-based character indexing: indices count Unicode code points, start is inclusive and end is exclusive.\n\
         - original_text must equal the source characters between start_index_orig and end_index_orig.\n\
         - Justify each error with a brief explanation in correct_text.\n\
         - If the translation has no errors, return an empty error_spans array.\n\
         \n\
         Respond with JSON only, using exactly this schema:\n\
         {{\n  \"error_spans\": [\n    {{\n{schema_fields}\n    }}\n  ]\n}}\n\
         \n\
         Source: {source}\n\
         MT: {mt}\n",
        src_lang = pair.source_lang,
        tgt_lang = pair.target_lang,
        source = pair.source_text,
        mt = pair.mt_text,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::PairStatus;

    fn pair() -> TranslationPair {
        TranslationPair {
            pair_id: "p".into(),
            dataset_id: "d".into(),
            source_lang: "en".into(),
            target_lang: "ja".into(),
            source_text: "Today Romani is spoken by small groups in 42 European countries.".into(),
            mt_text: "Todayen Romani は欧州の42か国で小グループで語られています.".into(),
            status: PairStatus::Pending,
        }
    }

    #[test]
    fn names_every_category_and_severity() {
        let prompt = build_ec1_prompt(&pair());
        for cat in [
            "Addition",
            "Omission",
            "Mistranslation",
            "Untranslated",
            "Grammar",
            "Spelling",
            "Typography",
            "Unintelligible",
        ] {
            assert!(prompt.contains(cat), "missing {cat}");
        }
        assert!(prompt.contains("Minor") && prompt.contains("Major"));
        assert!(prompt.contains("professional linguist"));
    }

    #[test]
    fn carries_texts_on_labeled_lines() {
        let p = pair();
        let prompt = build_ec1_prompt(&p);
        assert!(prompt.lines().any(|l| l == format!("Source: {}", p.source_text)));
        assert!(prompt.lines().any(|l| l == format!("MT: {}", p.mt_text)));
    }

    #[test]
    fn states_indexing_rules_and_schema() {
        let prompt = build_ec1_prompt(&pair());
        assert!(prompt.contains("non-overlapping"));
        assert!(prompt.contains("0-based"));
        assert!(prompt.contains("\"error_spans\""));
        for field in WIRE_FIELDS {
            assert!(prompt.contains(&format!("\"{field}\"")), "missing {field}");
        }
    }
}
