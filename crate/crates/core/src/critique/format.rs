//! Line-oriented critique format with machine-applicable fixes.
//!
//! ```text
//! - The shirt is black, not white. [REPLACE "white shirt" -> "black shirt"]
//! - The dog is not visible. [DELETE " and a dog"]
//! - The caption omits the lamp post. [APPEND "A lamp post stands on the left."]
//! - The lighting is described wrongly.
//! ```
//!
//! Quoted spans are JSON string literals. The no-edit sentence on its own is
//! the canonical "no changes" critique.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::triplet::{is_no_edit, NO_EDIT_CRITIQUE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: expected a \"- \" point, got {text:?}")]
    NotAPoint { line: usize, text: String },
    #[error("line {line}: malformed fix directive: {reason}")]
    BadDirective { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Fix {
    Replace { target: String, with: String },
    Delete { target: String },
    Append { text: String },
}

impl Fix {
    pub fn is_empty(&self) -> bool {
        match self {
            Fix::Replace { target, .. } | Fix::Delete { target } => target.is_empty(),
            Fix::Append { text } => text.is_empty(),
        }
    }
}

impl fmt::Display for Fix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |s: &str| serde_json::to_string(s).expect("strings always serialize");
        match self {
            Fix::Replace { target, with } => write!(f, "[REPLACE {} -> {}]", q(target), q(with)),
            Fix::Delete { target } => write!(f, "[DELETE {}]", q(target)),
            Fix::Append { text } => write!(f, "[APPEND {}]", q(text)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CritiquePoint {
    pub claim: String,
    pub fix: Option<Fix>,
}

impl CritiquePoint {
    pub fn new(claim: impl Into<String>, fix: Option<Fix>) -> Self {
        Self { claim: claim.into(), fix }
    }

    pub fn is_constructive(&self) -> bool {
        self.fix.as_ref().is_some_and(|f| !f.is_empty())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredCritique {
    pub points: Vec<CritiquePoint>,
    pub canonical_no_edit: bool,
}

impl StructuredCritique {
    pub fn no_edit() -> Self {
        Self { points: Vec::new(), canonical_no_edit: true }
    }

    pub fn from_points(points: Vec<CritiquePoint>) -> Self {
        Self { points, canonical_no_edit: false }
    }

    pub fn fixes(&self) -> impl Iterator<Item = &Fix> {
        self.points.iter().filter_map(|p| p.fix.as_ref())
    }

    pub fn is_constructive(&self) -> bool {
        self.points.iter().any(CritiquePoint::is_constructive)
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        if is_no_edit(text) {
            return Ok(Self::no_edit());
        }
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let body = line
                .strip_prefix("- ")
                .or_else(|| (line == "-").then_some(""))
                .ok_or_else(|| FormatError::NotAPoint { line: i + 1, text: line.to_string() })?;
            points.push(parse_point(body, i + 1)?);
        }
        Ok(Self::from_points(points))
    }

    pub fn render(&self) -> String {
        if self.canonical_no_edit {
            return NO_EDIT_CRITIQUE.to_string();
        }
        let mut out = String::new();
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str("- ");
            out.push_str(&p.claim);
            if let Some(fix) = &p.fix {
                if !p.claim.is_empty() {
                    out.push(' ');
                }
                out.push_str(&fix.to_string());
            }
        }
        out
    }
}

impl fmt::Display for StructuredCritique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn parse_point(body: &str, line: usize) -> Result<CritiquePoint, FormatError> {
    if !body.ends_with(']') {
        return Ok(CritiquePoint::new(body, None));
    }
    let mut last_err = None;
    for (idx, _) in body.match_indices('[') {
        if idx > 0 && body.as_bytes()[idx - 1] != b' ' {
            continue;
        }
        match parse_directive(&body[idx + 1..body.len() - 1]) {
            Ok(Some(fix)) => {
                let claim = body[..idx].trim_end();
                return Ok(CritiquePoint::new(claim, Some(fix)));
            }
            Ok(None) => {}
            Err(reason) => last_err = Some(reason),
        }
    }
    match last_err {
        Some(reason) => Err(FormatError::BadDirective { line, reason }),
        None => Ok(CritiquePoint::new(body, None)),
    }
}

/// `Ok(None)` when the bracket does not start with a directive keyword.
fn parse_directive(inner: &str) -> Result<Option<Fix>, String> {
    let (op, rest) = match inner.split_once(' ') {
        Some((op @ ("REPLACE" | "DELETE" | "APPEND"), rest)) => (op, rest),
        _ => return Ok(None),
    };
    let (first, rest) = json_string(rest)?;
    match op {
        "REPLACE" => {
            let rest = rest.strip_prefix(" -> ").ok_or("expected \" -> \" after the target")?;
            let (with, rest) = json_string(rest)?;
            if !rest.is_empty() {
                return Err(format!("trailing text {rest:?}"));
            }
            Ok(Some(Fix::Replace { target: first, with }))
        }
        _ if !rest.is_empty() => Err(format!("trailing text {rest:?}")),
        "DELETE" => Ok(Some(Fix::Delete { target: first })),
        _ => Ok(Some(Fix::Append { text: first })),
    }
}

fn json_string(s: &str) -> Result<(String, &str), String> {
    if !s.starts_with('"') {
        return Err("expected a quoted span".into());
    }
    let bytes = s.as_bytes();
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => {
                let value: String = serde_json::from_str(&s[..=i]).map_err(|e| e.to_string())?;
                return Ok((value, &s[i + 1..]));
            }
            _ => i += 1,
        }
    }
    Err("unterminated quoted span".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_all_directives() {
        let text = "- Shirt is black. [REPLACE \"white shirt\" -> \"black shirt\"]\n\
                    - No dog. [DELETE \" and a dog\"]\n\
                    - Lamp missing. [APPEND \"A lamp \\\"post\\\" stands.\"]\n\
                    - Lighting is off [sic].";
        let c = StructuredCritique::parse(text).unwrap();
        assert_eq!(c.points.len(), 4);
        assert_eq!(c.points[0].fix, Some(Fix::Replace { target: "white shirt".into(), with: "black shirt".into() }));
        assert_eq!(c.points[1].fix, Some(Fix::Delete { target: " and a dog".into() }));
        assert_eq!(c.points[2].fix, Some(Fix::Append { text: "A lamp \"post\" stands.".into() }));
        assert_eq!(c.points[3], CritiquePoint::new("Lighting is off [sic].", None));
        assert_eq!(c.render(), text);
        assert!(c.is_constructive());
    }

    #[test]
    fn canonical_and_empty() {
        let c = StructuredCritique::parse(NO_EDIT_CRITIQUE).unwrap();
        assert!(c.canonical_no_edit && c.points.is_empty());
        assert_eq!(c.render(), NO_EDIT_CRITIQUE);
        let e = StructuredCritique::parse("").unwrap();
        assert!(!e.canonical_no_edit && e.points.is_empty());
    }

    #[test]
    fn free_text_rejected() {
        assert!(matches!(
            StructuredCritique::parse("The answer is incorrect."),
            Err(FormatError::NotAPoint { line: 1, .. })
        ));
        assert!(matches!(
            StructuredCritique::parse("- x [REPLACE \"a\" \"b\"]"),
            Err(FormatError::BadDirective { .. })
        ));
    }

    #[test]
    fn fix_only_point() {
        let c = StructuredCritique::from_points(vec![CritiquePoint::new("", Some(Fix::Delete { target: "x".into() }))]);
        assert_eq!(c.render(), "- [DELETE \"x\"]");
        assert_eq!(StructuredCritique::parse(&c.render()).unwrap(), c);
    }
}
