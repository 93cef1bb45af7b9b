//! Probability-of-Yes rewards and inference-time caption scaling.

mod modes;
mod scaling;
mod vqa;

pub use modes::{score_with_mode, ScoreOptions, CRITIQUE_FIRST_SUFFIX, CRITIQUE_LAST_SUFFIX};
pub use scaling::{
    parse_improved_caption, predicted_cost, run_scaling, scaling_table, select_best, CallKind, Candidate, CostReport, ScalingConfig,
    ScalingFailure, ScalingMode, ScalingRow, ScalingRun, TranscriptRecord,
};
pub use vqa::{best_logprob, likert_fallback, p_yes_from_candidates, parse_likert, two_way_softmax, vqascore, RewardMode, RewardScore};

use crate::gateway::GatewayError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RewardError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("rollout {index} failed: {source}")]
    Rollout { index: u32, source: Box<RewardError> },
    #[error("no Likert score in 1..5 found in {0:?}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
}
