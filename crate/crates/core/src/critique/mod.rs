//! Critiques of controlled quality: degradations, model-written critiques
//! and constructiveness checks.

mod degrade;
mod format;

use serde::{Deserialize, Serialize};

pub use degrade::{degrade_structured, fabricated_points, DegradationKind};
pub use format::{CritiquePoint, Fix, FormatError, StructuredCritique};

use crate::gateway::{GatewayError, ModelClient, ModelRequest};
use crate::instructions::task_instruction;
use crate::prompts::templates::fill;
use crate::schema::AspectKind;

pub const INSERTION_TEMPLATE: &str = include_str!("../../resources/critique/insertion.txt");
pub const REPLACEMENT_TEMPLATE: &str = include_str!("../../resources/critique/replacement.txt");
pub const DELETION_TEMPLATE: &str = include_str!("../../resources/critique/deletion.txt");
pub const NON_CONSTRUCTIVE_TEMPLATE: &str = include_str!("../../resources/critique/non_constructive.txt");
pub const VIDEO_MODEL_TEMPLATE: &str = include_str!("../../resources/critique/video_model.txt");
pub const BLIND_MODEL_TEMPLATE: &str = include_str!("../../resources/critique/blind_model.txt");

pub const CLASSIFY_TEMPLATE: &str = "Decide whether the following critique of a video caption is constructive. \
A constructive critique states how to fix the problems it points out; a non-constructive critique only says that something is wrong.\n\n\
Answer with exactly one word: constructive or non-constructive.\n\nCritique: {critique}";

impl DegradationKind {
    pub fn template(self) -> &'static str {
        match self {
            DegradationKind::Insertion => INSERTION_TEMPLATE,
            DegradationKind::Replacement => REPLACEMENT_TEMPLATE,
            DegradationKind::Deletion => DELETION_TEMPLATE,
            DegradationKind::NonConstructive => NON_CONSTRUCTIVE_TEMPLATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CritiqueError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradeMode {
    Deterministic,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constructiveness {
    Constructive,
    NonConstructive,
}

/// One row of a degraded-critique corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegradedCritique {
    pub video_id: String,
    pub aspect: AspectKind,
    pub kind: DegradationKind,
    pub original: String,
    pub degraded: String,
    pub mode: DegradeMode,
    pub seed: u64,
}

pub fn render_degradation_prompt(kind: DegradationKind, caption_instruction: &str, caption: &str, feedback: &str) -> String {
    fill(kind.template(), &[("caption_instruction", caption_instruction), ("caption", caption), ("feedback", feedback)])
}

/// Deterministic degradation of a critique in the structured format.
pub fn degrade(critique: &str, kind: DegradationKind, seed: u64) -> Result<String, CritiqueError> {
    let parsed = StructuredCritique::parse(critique)?;
    Ok(degrade_structured(&parsed, kind, seed).render())
}

/// Degradation by a model, through the matching rewrite template.
pub fn degrade_llm(
    client: &dyn ModelClient,
    kind: DegradationKind,
    aspect: AspectKind,
    caption: &str,
    feedback: &str,
    seed: u64,
) -> Result<String, CritiqueError> {
    let prompt = render_degradation_prompt(kind, task_instruction(aspect), caption, feedback);
    let key = format!("degrade:{}:{seed}:{}", kind.as_str(), short_digest(&prompt));
    Ok(client.generate(&ModelRequest::generate(prompt, key).with_temperature(0.7))?.text.trim().to_string())
}

fn short_digest(text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(&Sha256::digest(text.as_bytes())[..6])
}

pub fn model_critique_prompt(aspect: AspectKind, caption: &str, sighted: bool) -> String {
    let template = if sighted { VIDEO_MODEL_TEMPLATE } else { BLIND_MODEL_TEMPLATE };
    fill(template, &[("caption_instruction", task_instruction(aspect)), ("caption", caption)])
}

/// Critique written by a model that either watches the video or only reads
/// the caption. Blind requests never carry the media reference.
pub fn gen_model_critique(
    client: &dyn ModelClient,
    media_uri: &str,
    aspect: AspectKind,
    caption: &str,
    sighted: bool,
) -> Result<String, GatewayError> {
    let prompt = model_critique_prompt(aspect, caption, sighted);
    let key = format!("critique:{}:{}", if sighted { "sighted" } else { "blind" }, short_digest(&format!("{media_uri}\n{prompt}")));
    let req = ModelRequest::generate(prompt, key).with_media(sighted.then_some(media_uri));
    Ok(client.generate(&req)?.text.trim().to_string())
}

/// Rule-based verdict for structured critiques; `None` for free text.
pub fn classify_constructiveness(critique: &str) -> Option<Constructiveness> {
    let parsed = StructuredCritique::parse(critique).ok()?;
    Some(if parsed.is_constructive() { Constructiveness::Constructive } else { Constructiveness::NonConstructive })
}

pub fn classify_constructiveness_llm(client: &dyn ModelClient, critique: &str) -> Result<Constructiveness, GatewayError> {
    if let Some(c) = classify_constructiveness(critique) {
        return Ok(c);
    }
    let prompt = fill(CLASSIFY_TEMPLATE, &[("critique", critique)]);
    let key = format!("classify:{}", short_digest(&prompt));
    let answer = client.generate(&ModelRequest::generate(prompt, key))?.text.to_lowercase();
    Ok(if answer.trim().starts_with("constructive") { Constructiveness::Constructive } else { Constructiveness::NonConstructive })
}

/// Surface heuristic used by the mock classifier.
pub fn looks_constructive(text: &str) -> bool {
    if let Some(c) = classify_constructiveness(text) {
        return c == Constructiveness::Constructive;
    }
    let lower = text.to_lowercase();
    ["should", "instead", "replace", "change", "rather than", "add ", "mention", "correct answer is", "it is actually"]
        .iter()
        .any(|cue| lower.contains(cue))
}
