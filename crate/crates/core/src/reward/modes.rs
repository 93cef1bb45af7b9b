//! Reward scoring with optional critique passes and self-consistency.

use super::vqa::{p_yes_from_candidates, request_key, RewardMode, RewardScore};
use super::RewardError;
use crate::gateway::{ModelClient, ModelRequest};
use crate::instructions::{caption_prompt, CAPTION_REWARD, CRITIQUE_GEN};

pub const CRITIQUE_FIRST_SUFFIX: &str = "Before answering, briefly critique the caption, then give the answer.";
pub const CRITIQUE_LAST_SUFFIX: &str = "Give the answer first, then briefly critique the caption.";

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOptions {
    pub rollouts: u32,
    pub temperature: f64,
    /// Distinguishes otherwise identical scoring runs.
    pub run_tag: String,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self { rollouts: 1, temperature: 0.0, run_tag: String::new() }
    }
}

fn question(mode: RewardMode) -> String {
    match mode {
        RewardMode::CritiqueFirst => format!("{CAPTION_REWARD} {CRITIQUE_FIRST_SUFFIX}"),
        RewardMode::CritiqueLast => format!("{CAPTION_REWARD} {CRITIQUE_LAST_SUFFIX}"),
        _ => CAPTION_REWARD.to_string(),
    }
}

/// Averages P(Yes) over `opts.rollouts` rollouts. Any failed rollout fails the score.
pub fn score_with_mode(
    client: &dyn ModelClient,
    media_uri: Option<&str>,
    instruction: &str,
    caption: &str,
    mode: RewardMode,
    opts: &ScoreOptions,
) -> Result<RewardScore, RewardError> {
    if opts.rollouts == 0 {
        return Err(RewardError::Domain("rollouts must be at least 1".into()));
    }
    let base = request_key(mode.as_str(), &[&opts.run_tag, media_uri.unwrap_or(""), instruction, caption]);
    let mut per_rollout = Vec::with_capacity(opts.rollouts as usize);
    for r in 0..opts.rollouts {
        let run = || -> Result<f64, RewardError> {
            let critique = if mode == RewardMode::SelfCritiqueConditioned {
                let prompt = caption_prompt(instruction, caption, None, CRITIQUE_GEN);
                let req = ModelRequest::generate(prompt, format!("{base}:{r}:critique"))
                    .with_media(media_uri)
                    .with_temperature(opts.temperature);
                Some(client.generate(&req)?.text.trim().to_string())
            } else {
                None
            };
            let prompt = caption_prompt(instruction, caption, critique.as_deref(), &question(mode));
            let req = ModelRequest::score(prompt, format!("{base}:{r}:score"))
                .with_media(media_uri)
                .with_temperature(opts.temperature);
            Ok(p_yes_from_candidates(&client.score_first_token(&req)?.first_token_candidates))
        };
        per_rollout.push(run().map_err(|e| RewardError::Rollout { index: r, source: Box::new(e) })?);
    }
    Ok(RewardScore::from_rollouts(mode, per_rollout))
}
