//! Seeded structural degradations of a critique.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::format::{CritiquePoint, Fix, StructuredCritique};
use crate::seed::seeded_rng;

const FABRICATED: &str = include_str!("../../resources/critique/fabricated_points.txt");
const SUBSTITUTIONS: &str = include_str!("../../resources/critique/substitutions.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradationKind {
    Insertion,
    Replacement,
    Deletion,
    NonConstructive,
}

impl DegradationKind {
    pub const ALL: [DegradationKind; 4] =
        [DegradationKind::Insertion, DegradationKind::Replacement, DegradationKind::Deletion, DegradationKind::NonConstructive];

    pub fn as_str(self) -> &'static str {
        match self {
            DegradationKind::Insertion => "insertion",
            DegradationKind::Replacement => "replacement",
            DegradationKind::Deletion => "deletion",
            DegradationKind::NonConstructive => "non_constructive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Plausible but wrong critique points used by deterministic insertion.
pub fn fabricated_points() -> &'static [CritiquePoint] {
    static POOL: OnceLock<Vec<CritiquePoint>> = OnceLock::new();
    POOL.get_or_init(|| StructuredCritique::parse(FABRICATED).expect("bundled pool parses").points)
}

fn substitutions() -> &'static [(String, String)] {
    static PAIRS: OnceLock<Vec<(String, String)>> = OnceLock::new();
    PAIRS.get_or_init(|| {
        SUBSTITUTIONS
            .lines()
            .filter_map(|l| l.split_once(' '))
            .flat_map(|(a, b)| [(a.to_string(), b.to_string()), (b.to_string(), a.to_string())])
            .collect()
    })
}

/// Swaps the first word that has a listed opposite, keeping its capitalization.
fn swap_word(text: &str) -> Option<String> {
    let mut offset = 0;
    for word in text.split_inclusive(|c: char| !c.is_alphanumeric()) {
        let core = word.trim_end_matches(|c: char| !c.is_alphanumeric());
        let lower = core.to_lowercase();
        if let Some((_, to)) = substitutions().iter().find(|(from, _)| *from == lower) {
            let mut to = to.clone();
            if core.chars().next().is_some_and(char::is_uppercase) {
                to = to[..1].to_uppercase() + &to[1..];
            }
            let mut out = text.to_string();
            out.replace_range(offset..offset + core.len(), &to);
            return Some(out);
        }
        offset += word.len();
    }
    None
}

fn fabricated_span(rng: &mut impl Rng, avoid: &str) -> String {
    let spans: Vec<&str> = fabricated_points()
        .iter()
        .filter_map(|p| match &p.fix {
            Some(Fix::Append { text }) => Some(text.as_str()),
            _ => None,
        })
        .filter(|s| *s != avoid)
        .collect();
    spans.choose(rng).expect("pool is non-empty").to_string()
}

fn corrupt(point: &CritiquePoint, rng: &mut impl Rng) -> CritiquePoint {
    let fix = point.fix.as_ref().expect("only called on points with a fix");
    let new_fix = match fix {
        Fix::Replace { target, with } => {
            let wrong = swap_word(with).unwrap_or_else(|| fabricated_span(rng, with));
            Fix::Replace { target: target.clone(), with: wrong }
        }
        Fix::Delete { target } => Fix::Replace { target: target.clone(), with: fabricated_span(rng, target) },
        Fix::Append { text } => Fix::Append { text: swap_word(text).unwrap_or_else(|| fabricated_span(rng, text)) },
    };
    let claim = swap_word(&point.claim).unwrap_or_else(|| point.claim.clone());
    CritiquePoint { claim, fix: Some(new_fix) }
}

/// Claim-only rewrite of a point: says what is wrong, never how to fix it.
/// Append points are pure guidance and are dropped.
fn strip_fix(point: &CritiquePoint) -> Option<CritiquePoint> {
    let claim = match &point.fix {
        Some(Fix::Replace { target, .. }) if !target.is_empty() => format!("The caption is wrong about \"{target}\"."),
        Some(Fix::Delete { target }) if !target.is_empty() => format!("\"{target}\" is not accurate."),
        Some(Fix::Append { .. }) => return None,
        _ => point.claim.clone(),
    };
    (!claim.is_empty()).then(|| CritiquePoint::new(claim, None))
}

pub fn degrade_structured(critique: &StructuredCritique, kind: DegradationKind, seed: u64) -> StructuredCritique {
    let mut rng = seeded_rng(seed, &["degrade", kind.as_str()]);
    let mut points = critique.points.clone();
    match kind {
        DegradationKind::Insertion => {
            let fresh: Vec<&CritiquePoint> = fabricated_points().iter().filter(|p| !points.contains(p)).collect();
            let extra = match fresh.choose(&mut rng) {
                Some(p) => (*p).clone(),
                None => {
                    let mut p = fabricated_points()[0].clone();
                    p.claim = format!("{} ({})", p.claim, points.len());
                    p
                }
            };
            let at = rng.gen_range(0..=points.len());
            points.insert(at, extra);
            StructuredCritique::from_points(points)
        }
        DegradationKind::Replacement => {
            let with_fix: Vec<usize> = (0..points.len()).filter(|&i| points[i].fix.is_some()).collect();
            let Some(&i) = with_fix.choose(&mut rng) else {
                return critique.clone();
            };
            points[i] = corrupt(&points[i], &mut rng);
            StructuredCritique { points, canonical_no_edit: critique.canonical_no_edit }
        }
        DegradationKind::Deletion => {
            if critique.canonical_no_edit {
                return critique.clone();
            }
            if points.len() <= 1 {
                return StructuredCritique::no_edit();
            }
            points.remove(rng.gen_range(0..points.len()));
            StructuredCritique::from_points(points)
        }
        DegradationKind::NonConstructive => {
            if critique.canonical_no_edit {
                return critique.clone();
            }
            let kept: Vec<CritiquePoint> = points.iter().filter_map(strip_fix).collect();
            if kept.is_empty() {
                StructuredCritique::no_edit()
            } else {
                StructuredCritique::from_points(kept)
            }
        }
    }
}
