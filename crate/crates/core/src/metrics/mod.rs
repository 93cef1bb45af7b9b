//! Reference-based and judge-based caption metrics, and metric
//! meta-evaluation against human scores.

mod bleu;
mod judge;
mod report;
mod rouge;
mod tie;
mod tokenize;

use serde::Serialize;

pub use bleu::{bleu4, bleu4_tokens, modified_precision};
pub use judge::{critique_revision_eval, llm_judge};
pub use report::{benchmark_report, BenchTask, BenchmarkReport, Prediction, PredictionKey, TaskRow};
pub use rouge::{lcs_len, rouge_l, rouge_l_tokens};
pub use tie::{pairwise_accuracy_tie_opt, tau_candidates, TieOptResult};
pub use tokenize::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("human and metric score lists differ in length ({human} vs {metric})")]
    LengthMismatch { human: usize, metric: usize },
    #[error("need at least two items, got {0}")]
    TooFewItems(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    pub name: String,
    pub value: f64,
    pub per_item: Vec<(String, f64)>,
}

impl MetricResult {
    /// Mean over items; 0 for an empty corpus.
    pub fn from_items(name: impl Into<String>, per_item: Vec<(String, f64)>) -> Self {
        let value = if per_item.is_empty() { 0.0 } else { per_item.iter().map(|(_, v)| v).sum::<f64>() / per_item.len() as f64 };
        Self { name: name.into(), value, per_item }
    }
}
