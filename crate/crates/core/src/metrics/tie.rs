//! Pairwise accuracy of a metric against human scores, with the metric's
//! tie threshold chosen to maximize agreement.

use serde::Serialize;

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TieOptResult {
    pub accuracy: f64,
    pub tau: f64,
    pub correct: usize,
    pub total: usize,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `{0}` plus midpoints between consecutive distinct sorted values.
pub fn tau_candidates(sorted_abs: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = sorted_abs.to_vec();
    distinct.dedup();
    let mut taus = vec![0.0];
    taus.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    taus
}

pub fn pairwise_accuracy_tie_opt(human: &[f64], metric: &[f64]) -> Result<TieOptResult, MetricError> {
    if human.len() != metric.len() {
        return Err(MetricError::LengthMismatch { human: human.len(), metric: metric.len() });
    }
    if human.len() < 2 {
        return Err(MetricError::TooFewItems(human.len()));
    }
    // (|dm|, correct if tied, correct if not tied)
    let mut pairs = Vec::with_capacity(human.len() * (human.len() - 1) / 2);
    for i in 0..human.len() {
        for j in i + 1..human.len() {
            let h = sign(human[i] - human[j]);
            let d = metric[i] - metric[j];
            pairs.push((d.abs(), h == 0, h != 0 && sign(d) == h));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let abs: Vec<f64> = pairs.iter().map(|p| p.0).collect();

    let mut correct: usize = pairs.iter().filter(|p| p.2).count();
    let mut next = 0;
    let mut best: Option<(usize, f64)> = None;
    for tau in tau_candidates(&abs) {
        while next < pairs.len() && pairs[next].0 <= tau {
            let (_, tie_ok, strict_ok) = pairs[next];
            correct = correct + tie_ok as usize - strict_ok as usize;
            next += 1;
        }
        if best.map_or(true, |(c, _)| correct > c) {
            best = Some((correct, tau));
        }
    }
    let (correct, tau) = best.expect("candidate set is never empty");
    let total = pairs.len();
    Ok(TieOptResult { accuracy: correct as f64 / total as f64, tau, correct, total })
}
