//! Deterministic application of critique fixes to a caption.

use serde::Serialize;

use crate::critique::{Fix, StructuredCritique};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EditOutcome {
    pub text: String,
    /// Directives whose target span was not found, in critique order.
    pub unmatched: Vec<Fix>,
}

pub fn apply_fix(text: &mut String, fix: &Fix) -> bool {
    match fix {
        Fix::Replace { target, with } => match text.find(target.as_str()).filter(|_| !target.is_empty()) {
            Some(at) => {
                text.replace_range(at..at + target.len(), with);
                true
            }
            None => false,
        },
        Fix::Delete { target } => match text.find(target.as_str()).filter(|_| !target.is_empty()) {
            Some(at) => {
                text.replace_range(at..at + target.len(), "");
                while let Some(i) = text.find("  ") {
                    text.remove(i);
                }
                true
            }
            None => false,
        },
        Fix::Append { text: sentence } => {
            let sentence = sentence.trim();
            if sentence.is_empty() {
                return false;
            }
            let base = text.trim_end();
            *text = if base.is_empty() { sentence.to_string() } else { format!("{base} {sentence}") };
            true
        }
    }
}

/// Applies the critique's fixes in order. Points without a fix are ignored.
pub fn apply_edit_script(caption: &str, critique: &StructuredCritique) -> EditOutcome {
    let mut text = caption.to_string();
    let mut unmatched = Vec::new();
    for fix in critique.fixes() {
        if !apply_fix(&mut text, fix) {
            unmatched.push(fix.clone());
        }
    }
    EditOutcome { text, unmatched }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critique::CritiquePoint;

    fn script(fixes: Vec<Fix>) -> StructuredCritique {
        StructuredCritique::from_points(fixes.into_iter().map(|f| CritiquePoint::new("x", Some(f))).collect())
    }

    #[test]
    fn replace_first_occurrence() {
        let c = script(vec![Fix::Replace { target: "white shirt".into(), with: "black shirt".into() }]);
        let out = apply_edit_script("The man wears a white shirt.", &c);
        assert_eq!(out.text, "The man wears a black shirt.");
        assert!(out.unmatched.is_empty());
        let again = apply_edit_script(&out.text, &c);
        assert_eq!(again.text, out.text);
        assert_eq!(again.unmatched.len(), 1);
    }

    #[test]
    fn delete_and_append() {
        let c = script(vec![
            Fix::Delete { target: "slowly ".into() },
            Fix::Append { text: "A dog follows.".into() },
        ]);
        let out = apply_edit_script("He walks slowly to the car.", &c);
        assert_eq!(out.text, "He walks to the car. A dog follows.");
        let out = apply_edit_script("A man , slowly walks.", &script(vec![Fix::Delete { target: "," .into() }]));
        assert_eq!(out.text, "A man slowly walks.");
    }

    #[test]
    fn identity_on_empty_script() {
        let out = apply_edit_script("Unchanged caption.", &StructuredCritique::default());
        assert_eq!(out.text, "Unchanged caption.");
        assert_eq!(apply_edit_script("Same.", &StructuredCritique::no_edit()).text, "Same.");
    }

    #[test]
    fn unmatched_reported() {
        let c = script(vec![Fix::Delete { target: "zebra".into() }]);
        let out = apply_edit_script("A horse.", &c);
        assert_eq!(out.text, "A horse.");
        assert_eq!(out.unmatched, vec![Fix::Delete { target: "zebra".into() }]);
    }
}
