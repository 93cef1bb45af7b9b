//! Probability-of-Yes scoring from first-token log-probabilities.

use serde::{Deserialize, Serialize};

use super::RewardError;
use crate::gateway::{ModelClient, ModelRequest, TokenLogprob, LOGPROB_FLOOR};
use crate::instructions::{caption_prompt, CAPTION_REWARD, CAPTION_SCORING};

/// Best logprob among tokens equal to `word` after trimming, ignoring case.
pub fn best_logprob(candidates: &[TokenLogprob], word: &str) -> f64 {
    candidates
        .iter()
        .filter(|t| t.token.trim().eq_ignore_ascii_case(word))
        .map(|t| t.logprob)
        .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.max(l))))
        .unwrap_or(LOGPROB_FLOOR)
}

/// Softmax restricted to the Yes/No pair.
pub fn two_way_softmax(l_yes: f64, l_no: f64) -> f64 {
    let m = l_yes.max(l_no);
    let (y, n) = ((l_yes - m).exp(), (l_no - m).exp());
    y / (y + n)
}

pub fn p_yes_from_candidates(candidates: &[TokenLogprob]) -> f64 {
    two_way_softmax(best_logprob(candidates, "yes"), best_logprob(candidates, "no"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    Direct,
    CritiqueFirst,
    CritiqueLast,
    SelfCritiqueConditioned,
}

impl RewardMode {
    pub const ALL: [RewardMode; 4] =
        [RewardMode::Direct, RewardMode::CritiqueFirst, RewardMode::CritiqueLast, RewardMode::SelfCritiqueConditioned];

    pub fn as_str(self) -> &'static str {
        match self {
            RewardMode::Direct => "direct",
            RewardMode::CritiqueFirst => "critique_first",
            RewardMode::CritiqueLast => "critique_last",
            RewardMode::SelfCritiqueConditioned => "self_critique_conditioned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// Inference passes per rollout.
    pub fn passes(self) -> u32 {
        match self {
            RewardMode::SelfCritiqueConditioned => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardScore {
    pub p_yes: f64,
    pub mode: RewardMode,
    pub rollouts: u32,
    pub per_rollout: Vec<f64>,
    /// Total inference passes across all rollouts.
    pub passes: u32,
}

impl RewardScore {
    pub fn from_rollouts(mode: RewardMode, per_rollout: Vec<f64>) -> Self {
        let rollouts = per_rollout.len() as u32;
        let p_yes = per_rollout.iter().sum::<f64>() / per_rollout.len().max(1) as f64;
        Self { p_yes, mode, rollouts, per_rollout, passes: rollouts * mode.passes() }
    }
}

pub(crate) fn request_key(tag: &str, parts: &[&str]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    format!("{tag}:{}", hex::encode(&h.finalize()[..8]))
}

/// Single-pass P(Yes) for the caption-reward question.
pub fn vqascore(client: &dyn ModelClient, media_uri: Option<&str>, instruction: &str, caption: &str) -> Result<RewardScore, RewardError> {
    let prompt = caption_prompt(instruction, caption, None, CAPTION_REWARD);
    let req = ModelRequest::score(&prompt, request_key("vqa", &[media_uri.unwrap_or(""), &prompt])).with_media(media_uri);
    let resp = client.score_first_token(&req)?;
    Ok(RewardScore::from_rollouts(RewardMode::Direct, vec![p_yes_from_candidates(&resp.first_token_candidates)]))
}

/// First integer in 1..=5 appearing in `text`.
pub fn parse_likert(text: &str) -> Result<u8, RewardError> {
    let mut digits = String::new();
    let check = |run: &mut String| -> Option<u8> {
        let v = run.parse::<u32>().ok().filter(|v| (1..=5).contains(v));
        run.clear();
        v.map(|v| v as u8)
    };
    for ch in text.chars().chain(std::iter::once(' ')) {
        if ch.is_ascii_digit() {
            digits.push(ch);
        } else if !digits.is_empty() {
            if let Some(v) = check(&mut digits) {
                return Ok(v);
            }
        }
    }
    Err(RewardError::Parse(text.chars().take(80).collect()))
}

/// Likert score via text generation, for providers without logprobs.
pub fn likert_fallback(client: &dyn ModelClient, media_uri: Option<&str>, instruction: &str, caption: &str) -> Result<u8, RewardError> {
    let prompt = caption_prompt(instruction, caption, None, CAPTION_SCORING);
    let req = ModelRequest::generate(&prompt, request_key("likert", &[media_uri.unwrap_or(""), &prompt])).with_media(media_uri);
    parse_likert(&client.generate(&req)?.text)
}
