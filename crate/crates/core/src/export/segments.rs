//! Unchanged/corrected token segments between a rejected and a chosen text.

use serde::{Deserialize, Serialize};

use crate::metrics::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentTag {
    Unchanged,
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub tokens: Vec<String>,
    pub tag: SegmentTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub chosen: Vec<Segment>,
    pub rejected: Vec<Segment>,
}

impl SegmentLabel {
    pub fn chosen_tokens(&self) -> Vec<String> {
        self.chosen.iter().flat_map(|s| s.tokens.iter().cloned()).collect()
    }

    pub fn rejected_tokens(&self) -> Vec<String> {
        self.rejected.iter().flat_map(|s| s.tokens.iter().cloned()).collect()
    }
}

/// Aligned[i] is true when token i is part of the LCS.
fn lcs_mask(a: &[String], b: &[String]) -> (Vec<bool>, Vec<bool>) {
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i][j] = if a[i] == b[j] { dp[i + 1][j + 1] + 1 } else { dp[i + 1][j].max(dp[i][j + 1]) };
        }
    }
    let (mut ma, mut mb) = (vec![false; n], vec![false; m]);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            ma[i] = true;
            mb[j] = true;
            i += 1;
            j += 1;
        } else if dp[i + 1][j] >= dp[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    (ma, mb)
}

fn runs(tokens: Vec<String>, mask: &[bool]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (tok, aligned) in tokens.into_iter().zip(mask) {
        let tag = if *aligned { SegmentTag::Unchanged } else { SegmentTag::Corrected };
        match out.last_mut() {
            Some(seg) if seg.tag == tag => seg.tokens.push(tok),
            _ => out.push(Segment { tokens: vec![tok], tag }),
        }
    }
    out
}

pub fn rlhfv_segments(rejected: &str, chosen: &str) -> SegmentLabel {
    let r = tokenize(rejected);
    let c = tokenize(chosen);
    let (mr, mc) = lcs_mask(&r, &c);
    SegmentLabel { chosen: runs(c, &mc), rejected: runs(r, &mr) }
}
