//! Sentence-level BLEU-4 with fixed smoothing.

use std::collections::HashMap;

use super::tokenize::tokenize;

const EMPTY_ORDER_PRECISION: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped precision for order `n`, after smoothing.
pub fn modified_precision(candidate: &[String], reference: &[String], n: usize) -> f64 {
    let total = candidate.len().saturating_sub(n - 1);
    if total == 0 {
        return EMPTY_ORDER_PRECISION;
    }
    let refs = ngram_counts(reference, n);
    let matches: usize = ngram_counts(candidate, n)
        .into_iter()
        .map(|(gram, count)| count.min(refs.get(gram).copied().unwrap_or(0)))
        .sum();
    if matches == 0 {
        1.0 / (2.0 * total as f64)
    } else {
        matches as f64 / total as f64
    }
}

pub fn bleu4_tokens(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let log_sum: f64 = (1..=4).map(|n| modified_precision(candidate, reference, n).ln() / 4.0).sum();
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    bp * log_sum.exp()
}

pub fn bleu4(candidate: &str, reference: &str) -> f64 {
    bleu4_tokens(&tokenize(candidate), &tokenize(reference))
}
