//! Shared fixtures for benchmarks.

use oversight_core::metrics::tokenize;

const WORDS: [&str; 12] = ["a", "man", "in", "a", "red", "coat", "walks", "left", "past", "the", "parked", "car"];

/// Deterministic caption-like token sequence; `shift` varies the word order.
pub fn tokens(len: usize, shift: usize) -> Vec<String> {
    let text: Vec<&str> = (0..len).map(|i| WORDS[(i * 7 + shift * 3 + i / 5) % WORDS.len()]).collect();
    tokenize(&text.join(" "))
}

/// Human/metric score pairs with plenty of ties.
pub fn score_pairs(n: usize) -> (Vec<f64>, Vec<f64>) {
    let human = (0..n).map(|i| (1 + (i * 37) % 5) as f64).collect::<Vec<_>>();
    let metric = human.iter().enumerate().map(|(i, h)| h * 0.2 + ((i * 13) % 10) as f64 / 40.0).collect();
    (human, metric)
}
