//! Inference-time caption scaling: best-of-N and iterative refinement, with
//! call accounting checked against the closed-form cost model.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::vqa::{p_yes_from_candidates, request_key};
use super::RewardError;
use crate::gateway::{GatewayError, ModelClient, ModelRequest};
use crate::instructions::{
    caption_prompt, CAPTION_REVISION, CAPTION_REVISION_WITH_CRITIQUE, CAPTION_REWARD, CRITIQUE_BASED_REVISION, CRITIQUE_GEN,
    CRITIQUE_REWARD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    BonCaption,
    BonRevision,
    BonCritThenRev,
    BonCritBasedRev,
    BonCritique,
    IterRevision,
    IterCritThenRev,
    IterCritBasedRev,
}

impl ScalingMode {
    pub const ALL: [ScalingMode; 8] = [
        ScalingMode::BonCaption,
        ScalingMode::BonRevision,
        ScalingMode::BonCritThenRev,
        ScalingMode::BonCritBasedRev,
        ScalingMode::BonCritique,
        ScalingMode::IterRevision,
        ScalingMode::IterCritThenRev,
        ScalingMode::IterCritBasedRev,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::BonCaption => "bon_caption",
            ScalingMode::BonRevision => "bon_revision",
            ScalingMode::BonCritThenRev => "bon_crit_then_rev",
            ScalingMode::BonCritBasedRev => "bon_crit_based_rev",
            ScalingMode::BonCritique => "bon_critique",
            ScalingMode::IterRevision => "iter_revision",
            ScalingMode::IterCritThenRev => "iter_crit_then_rev",
            ScalingMode::IterCritBasedRev => "iter_crit_based_rev",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn is_iterative(self) -> bool {
        matches!(self, ScalingMode::IterRevision | ScalingMode::IterCritThenRev | ScalingMode::IterCritBasedRev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    Caption,
    Critique,
    Revision,
    /// Critique and revision written in one response; costs two generations.
    CritiqueBasedRevision,
    CaptionReward,
    CritiqueReward,
}

impl CallKind {
    pub fn generation_weight(self) -> u32 {
        match self {
            CallKind::CritiqueBasedRevision => 2,
            CallKind::CaptionReward | CallKind::CritiqueReward => 0,
            _ => 1,
        }
    }

    pub fn is_reward(self) -> bool {
        matches!(self, CallKind::CaptionReward | CallKind::CritiqueReward)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub generation_calls: u32,
    pub reward_calls: u32,
    /// Raw call counts per kind, in `CallKind` order.
    pub breakdown: Vec<(CallKind, u32)>,
}

impl CostReport {
    pub fn from_calls(calls: impl IntoIterator<Item = (CallKind, u32)>) -> Self {
        let mut breakdown: Vec<(CallKind, u32)> = Vec::new();
        for (kind, n) in calls {
            if n == 0 {
                continue;
            }
            match breakdown.iter_mut().find(|(k, _)| *k == kind) {
                Some(slot) => slot.1 += n,
                None => breakdown.push((kind, n)),
            }
        }
        breakdown.sort();
        let generation_calls = breakdown.iter().map(|(k, n)| k.generation_weight() * n).sum();
        let reward_calls = breakdown.iter().filter(|(k, _)| k.is_reward()).map(|(_, n)| n).sum();
        Self { generation_calls, reward_calls, breakdown }
    }
}

pub fn predicted_cost(mode: ScalingMode, n: u32) -> Result<CostReport, RewardError> {
    if n < 1 {
        return Err(RewardError::Domain("N must be at least 1".into()));
    }
    use CallKind::*;
    let calls = match mode {
        ScalingMode::BonCaption => vec![(Caption, n), (CaptionReward, n)],
        ScalingMode::BonRevision => vec![(Caption, 1), (Revision, n), (CaptionReward, n)],
        ScalingMode::BonCritThenRev => vec![(Caption, 1), (Critique, n), (Revision, n), (CaptionReward, n)],
        ScalingMode::BonCritBasedRev => vec![(Caption, 1), (CritiqueBasedRevision, n), (CaptionReward, n)],
        ScalingMode::BonCritique => vec![(Caption, 1), (Critique, n), (Revision, 1), (CritiqueReward, n)],
        ScalingMode::IterRevision => vec![(Caption, 1), (Revision, n)],
        ScalingMode::IterCritThenRev => vec![(Caption, 1), (Critique, n), (Revision, n)],
        ScalingMode::IterCritBasedRev => vec![(Caption, 1), (CritiqueBasedRevision, n)],
    };
    Ok(CostReport::from_calls(calls))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub run_id: String,
    pub mode: ScalingMode,
    #[serde(rename = "N")]
    pub n: u32,
    pub call_index: u32,
    pub kind: CallKind,
    pub prompt_digest: String,
    pub response_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    pub reward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub run_id: String,
    pub mode: ScalingMode,
    #[serde(rename = "N")]
    pub n: u32,
    pub seed: u64,
    /// Captions for most modes; critiques for `bon_critique`; iterates for iterative modes.
    pub candidates: Vec<Candidate>,
    pub selected: String,
    pub cost: CostReport,
    pub transcript: Vec<TranscriptRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("scaling run {run_id} failed after {} calls: {error}", partial.len())]
pub struct ScalingFailure {
    pub run_id: String,
    pub error: GatewayError,
    pub partial: Vec<TranscriptRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub temperature: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { temperature: 0.7 }
    }
}

/// Index of the highest reward; ties go to the lowest index.
pub fn select_best(rewards: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rewards.iter().enumerate() {
        if best.map_or(true, |b| *r > rewards[b]) {
            best = Some(i);
        }
    }
    best
}

fn short(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

struct Runner<'a> {
    client: &'a dyn ModelClient,
    media_uri: Option<&'a str>,
    instruction: &'a str,
    run_id: String,
    mode: ScalingMode,
    n: u32,
    temperature: f64,
    transcript: Vec<TranscriptRecord>,
}

impl Runner<'_> {
    fn call(&mut self, kind: CallKind, prompt: String) -> Result<(String, f64), GatewayError> {
        let index = self.transcript.len() as u32;
        let key = format!("{}:{index}", self.run_id);
        let (text, p) = if kind.is_reward() {
            let req = ModelRequest::score(&prompt, key).with_media(self.media_uri);
            let resp = self.client.score_first_token(&req)?;
            (resp.text, p_yes_from_candidates(&resp.first_token_candidates))
        } else {
            let req = ModelRequest::generate(&prompt, key).with_media(self.media_uri).with_temperature(self.temperature);
            (self.client.generate(&req)?.text.trim().to_string(), f64::NAN)
        };
        self.transcript.push(TranscriptRecord {
            run_id: self.run_id.clone(),
            mode: self.mode,
            n: self.n,
            call_index: index,
            kind,
            prompt_digest: short(&prompt),
            response_digest: short(&text),
        });
        Ok((text, p))
    }

    fn caption(&mut self) -> Result<String, GatewayError> {
        Ok(self.call(CallKind::Caption, self.instruction.to_string())?.0)
    }

    fn revise(&mut self, caption: &str) -> Result<String, GatewayError> {
        Ok(self.call(CallKind::Revision, caption_prompt(self.instruction, caption, None, CAPTION_REVISION))?.0)
    }

    fn critique(&mut self, caption: &str) -> Result<String, GatewayError> {
        let text = self.call(CallKind::Critique, caption_prompt(self.instruction, caption, None, CRITIQUE_GEN))?.0;
        Ok(text)
    }

    fn revise_with(&mut self, caption: &str, critique: &str) -> Result<String, GatewayError> {
        let prompt = caption_prompt(self.instruction, caption, Some(critique), CAPTION_REVISION_WITH_CRITIQUE);
        Ok(self.call(CallKind::Revision, prompt)?.0)
    }

    fn critique_based(&mut self, caption: &str) -> Result<String, GatewayError> {
        let prompt = caption_prompt(self.instruction, caption, None, CRITIQUE_BASED_REVISION);
        let text = self.call(CallKind::CritiqueBasedRevision, prompt)?.0;
        Ok(parse_improved_caption(&text).unwrap_or(caption).to_string())
    }

    fn reward(&mut self, caption: &str) -> Result<f64, GatewayError> {
        Ok(self.call(CallKind::CaptionReward, caption_prompt(self.instruction, caption, None, CAPTION_REWARD))?.1)
    }

    fn critique_reward(&mut self, caption: &str, critique: &str) -> Result<f64, GatewayError> {
        Ok(self.call(CallKind::CritiqueReward, caption_prompt(self.instruction, caption, Some(critique), CRITIQUE_REWARD))?.1)
    }

    fn best_of(&mut self, captions: Vec<String>) -> Result<(Vec<Candidate>, String), GatewayError> {
        let mut candidates = Vec::with_capacity(captions.len());
        for c in captions {
            let r = self.reward(&c)?;
            candidates.push(Candidate { text: c, reward: Some(r) });
        }
        let rewards: Vec<f64> = candidates.iter().map(|c| c.reward.unwrap_or(f64::NEG_INFINITY)).collect();
        let best = select_best(&rewards).expect("N >= 1");
        let selected = candidates[best].text.clone();
        Ok((candidates, selected))
    }

    fn execute(&mut self) -> Result<(Vec<Candidate>, String), GatewayError> {
        let n = self.n as usize;
        match self.mode {
            ScalingMode::BonCaption => {
                let caps = (0..n).map(|_| self.caption()).collect::<Result<Vec<_>, _>>()?;
                self.best_of(caps)
            }
            ScalingMode::BonRevision => {
                let base = self.caption()?;
                let caps = (0..n).map(|_| self.revise(&base)).collect::<Result<Vec<_>, _>>()?;
                self.best_of(caps)
            }
            ScalingMode::BonCritThenRev => {
                let base = self.caption()?;
                let crits = (0..n).map(|_| self.critique(&base)).collect::<Result<Vec<_>, _>>()?;
                let caps = crits.iter().map(|c| self.revise_with(&base, c)).collect::<Result<Vec<_>, _>>()?;
                self.best_of(caps)
            }
            ScalingMode::BonCritBasedRev => {
                let base = self.caption()?;
                let caps = (0..n).map(|_| self.critique_based(&base)).collect::<Result<Vec<_>, _>>()?;
                self.best_of(caps)
            }
            ScalingMode::BonCritique => {
                let base = self.caption()?;
                let crits = (0..n).map(|_| self.critique(&base)).collect::<Result<Vec<_>, _>>()?;
                let mut candidates = Vec::with_capacity(n);
                for c in crits {
                    let r = self.critique_reward(&base, &c)?;
                    candidates.push(Candidate { text: c, reward: Some(r) });
                }
                let rewards: Vec<f64> = candidates.iter().map(|c| c.reward.unwrap_or(f64::NEG_INFINITY)).collect();
                let best = select_best(&rewards).expect("N >= 1");
                let critique = candidates[best].text.clone();
                let selected = self.revise_with(&base, &critique)?;
                Ok((candidates, selected))
            }
            ScalingMode::IterRevision | ScalingMode::IterCritThenRev | ScalingMode::IterCritBasedRev => {
                let mut current = self.caption()?;
                let mut iterates = Vec::with_capacity(n);
                for _ in 0..n {
                    current = match self.mode {
                        ScalingMode::IterRevision => self.revise(&current)?,
                        ScalingMode::IterCritThenRev => {
                            let c = self.critique(&current)?;
                            self.revise_with(&current, &c)?
                        }
                        _ => self.critique_based(&current)?,
                    };
                    iterates.push(Candidate { text: current.clone(), reward: None });
                }
                Ok((iterates, current))
            }
        }
    }
}

/// Pulls the caption after "Improved Caption:" from a critique-based revision.
pub fn parse_improved_caption(text: &str) -> Option<&str> {
    text.rsplit_once("Improved Caption:").map(|(_, c)| c.trim())
}

pub fn run_scaling(
    client: &dyn ModelClient,
    media_uri: Option<&str>,
    instruction: &str,
    mode: ScalingMode,
    n: u32,
    seed: u64,
    config: &ScalingConfig,
) -> Result<ScalingRun, ScalingFailure> {
    let run_id = request_key("scale", &[mode.as_str(), &n.to_string(), &seed.to_string(), media_uri.unwrap_or(""), instruction]);
    if n < 1 {
        return Err(ScalingFailure { run_id, error: GatewayError::InvalidRequest("N must be at least 1".into()), partial: Vec::new() });
    }
    let mut runner = Runner {
        client,
        media_uri,
        instruction,
        run_id: run_id.clone(),
        mode,
        n,
        temperature: config.temperature,
        transcript: Vec::new(),
    };
    match runner.execute() {
        Ok((candidates, selected)) => {
            let cost = CostReport::from_calls(runner.transcript.iter().map(|t| (t.kind, 1)));
            Ok(ScalingRun { run_id, mode, n, seed, candidates, selected, cost, transcript: runner.transcript })
        }
        Err(error) => Err(ScalingFailure { run_id, error, partial: runner.transcript }),
    }
}

/// One row of a scaling report: mode, N, quality score and costs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub mode: ScalingMode,
    pub n: u32,
    pub score: f64,
    pub generation_cost: u32,
    pub reward_cost: u32,
}

pub fn scaling_table(rows: &[ScalingRow]) -> String {
    let mut out = String::from("mode\tN\tscore\tgeneration_cost\treward_cost\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\t{:.4}\t{}\t{}\n", r.mode.as_str(), r.n, r.score, r.generation_cost, r.reward_cost));
    }
    out
}
