//! Deterministic stand-in for a vision-language model.
//!
//! Requests are routed by prompt family (pre-caption policies, revision,
//! caption-conditioned formats, critique templates, judges, merge). Every
//! answer is a pure function of the seed, the request and, for revisions,
//! how many revisions the same video and aspect have already seen.

mod world;

use std::collections::HashMap;
use std::time::Duration;

use parking_lot::Mutex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use world::{aspect_of_caption, fact_pool, Fact, MockScenario, PlantedError, FACTS_PER_CAPTION, PRE_SCORE_DIST};

use super::{apply_edit_script, normalize_candidates, GatewayError, ModelClient, ModelRequest, ModelResponse, RequestKind, TokenLogprob};
use crate::critique::{self, CritiquePoint, DegradationKind, Fix, StructuredCritique};
use crate::instructions::{self, parse_caption_prompt, parse_revision_prompt};
use crate::metrics::rouge_l;
use crate::schema::AspectKind;
use crate::seed::seeded_rng;
use crate::triplet::is_no_edit;

fn digest(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MockConfig {
    pub seed: u64,
    /// P(first revision leaves one error), indexed like `AspectKind::ALL`.
    pub convergence_profile: [f64; 5],
    /// P(a video's first pre-caption draft mentions a frame).
    pub frame_mention_rate: f64,
    /// P(the sighted critic catches each error).
    pub critique_recall: f64,
    /// P(an unguided self-revision fixes each error).
    pub self_fix_rate: f64,
    /// When set, every score request returns exactly these candidates.
    pub score_override: Option<Vec<TokenLogprob>>,
    /// When false, score requests come back without candidates.
    pub logprobs: bool,
}

impl MockConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            // residual / (1 - P(pre score 5)) puts mean iterations at
            // 1.1, 1.1, 1.2, 1.4 and 1.0
            convergence_profile: [0.125, 0.125, 0.25, 0.4 / 0.9, 0.0],
            frame_mention_rate: 0.05,
            critique_recall: 0.9,
            self_fix_rate: 0.5,
            score_override: None,
            logprobs: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub index: usize,
    pub kind: RequestKind,
    pub idempotency_key: String,
    pub prompt_digest: String,
    pub response_digest: String,
    pub cached: bool,
}

#[derive(Default)]
struct MockState {
    revisions: HashMap<(String, Option<AspectKind>), u32>,
    cache: HashMap<String, ModelResponse>,
    transcript: Vec<TranscriptEntry>,
}

pub struct MockModel {
    config: MockConfig,
    state: Mutex<MockState>,
}

struct Reply {
    text: String,
    p_yes: Option<f64>,
}

impl Reply {
    fn text(text: impl Into<String>) -> Self {
        Self { text: text.into(), p_yes: None }
    }

    fn score(p: f64) -> Self {
        let p = p.clamp(1e-6, 1.0 - 1e-6);
        Self { text: if p >= 0.5 { "Yes" } else { "No" }.into(), p_yes: Some(p) }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn between<'a>(text: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let from = text.find(start)? + start.len();
    let len = text[from..].find(end)?;
    Some(&text[from..from + len])
}

fn first_line(template: &str) -> &str {
    template.lines().next().unwrap_or(template)
}

impl MockModel {
    pub fn new(config: MockConfig) -> Self {
        Self { config, state: Mutex::new(MockState::default()) }
    }

    pub fn with_seed(seed: u64) -> Self {
        Self::new(MockConfig::new(seed))
    }

    pub fn config(&self) -> &MockConfig {
        &self.config
    }

    /// Ground truth behind the mock's answers for one video and aspect.
    pub fn scenario(&self, media_uri: &str, aspect: AspectKind) -> MockScenario {
        MockScenario::derive(
            self.config.seed,
            media_uri,
            aspect,
            self.config.convergence_profile[aspect as usize],
            self.config.frame_mention_rate,
        )
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.state.lock().transcript.clone()
    }

    /// Number of answered requests, cache hits included.
    pub fn calls(&self) -> usize {
        self.state.lock().transcript.len()
    }

    fn rng(&self, req: &ModelRequest, parts: &[&str]) -> ChaCha8Rng {
        let mut all: Vec<&str> = parts.to_vec();
        all.push(&req.prompt);
        if let Some(m) = &req.media_uri {
            all.push(m);
        }
        if req.temperature > 0.0 {
            all.push(&req.idempotency_key);
        }
        seeded_rng(self.config.seed, &all)
    }

    fn world(&self, req: &ModelRequest, aspect: Option<AspectKind>, caption: &str) -> Option<MockScenario> {
        let uri = req.media_uri.as_deref()?;
        let aspect = aspect.or_else(|| aspect_of_caption(caption))?;
        Some(self.scenario(uri, aspect))
    }

    fn route(&self, req: &ModelRequest, state: &mut MockState) -> Reply {
        let prompt = req.prompt.as_str();
        if let Some((pre, critique)) = parse_revision_prompt(prompt) {
            return Reply::text(self.revise(req, pre, critique, state));
        }
        if let Some(p) = parse_caption_prompt(prompt) {
            return self.caption_format(req, p.instruction, p.caption, p.critique, p.question);
        }
        for kind in DegradationKind::ALL {
            if prompt.starts_with(first_line(kind.template())) {
                return Reply::text(self.degradation(req, kind));
            }
        }
        for (template, sighted) in [(critique::VIDEO_MODEL_TEMPLATE, true), (critique::BLIND_MODEL_TEMPLATE, false)] {
            if prompt.starts_with(first_line(template)) {
                let caption = between(prompt, "\n\nCaption: ", "\n\nInstructions:").unwrap_or("");
                let aspect = between(prompt, "Caption Instruction: ", "\n\n").and_then(instructions::aspect_of_instruction);
                return Reply::text(self.critique_of(req, aspect, caption, sighted && req.media_uri.is_some()).render());
            }
        }
        if prompt.starts_with(first_line(critique::CLASSIFY_TEMPLATE)) {
            let text = prompt.rsplit_once("Critique: ").map_or("", |(_, c)| c);
            return Reply::text(if critique::looks_constructive(text) { "constructive" } else { "non-constructive" });
        }
        if prompt.starts_with("Reference caption: ") || prompt.starts_with("Task Instruction: ") {
            if let (Some(r), Some(c)) = (between(prompt, "Reference caption: ", "\n\n"), between(prompt, "Candidate caption: ", "\n\n")) {
                let sharp = if prompt.starts_with("Task") { 12.0 } else { 9.0 };
                return Reply::score(sigmoid(sharp * (rouge_l(c, r) - 0.6)));
            }
        }
        if prompt.starts_with(first_line(crate::export::MERGE_TEMPLATE)) {
            let block = between(prompt, "Input Captions:\n", "\n\nInstructions:").unwrap_or("");
            let merged: Vec<&str> = block.lines().map(|l| l.split_once(": ").map_or(l, |(_, c)| c)).collect();
            return Reply::text(merged.join(" "));
        }
        if let Some(aspect) = AspectKind::ALL.iter().copied().find(|a| prompt == instructions::task_instruction(*a)) {
            return Reply::text(self.sample_caption(req, aspect));
        }
        if let Some(aspect) = precaption_aspect(prompt) {
            return Reply::text(self.precaption(req, aspect));
        }
        Reply::text("OK")
    }

    fn precaption(&self, req: &ModelRequest, aspect: AspectKind) -> String {
        let Some(uri) = req.media_uri.as_deref() else {
            return self.sample_caption(req, aspect);
        };
        let s = self.scenario(uri, aspect);
        let caption = if req.temperature > 0.0 { self.sample_caption(req, aspect) } else { s.pre_caption() };
        if s.frame_mention && !req.prompt.contains(instructions::NO_FRAME_INSTRUCTION) {
            let mut chars = caption.chars();
            let head: String = chars.next().map(|c| c.to_lowercase().collect()).unwrap_or_default();
            return format!("In the first frame, {head}{}", chars.as_str());
        }
        caption
    }

    fn sample_caption(&self, req: &ModelRequest, aspect: AspectKind) -> String {
        let uri = req.media_uri.as_deref().unwrap_or("");
        let s = self.scenario(uri, aspect);
        if req.temperature == 0.0 {
            return s.pre_caption();
        }
        let mut rng = self.rng(req, &["sample"]);
        let score = world::draw_pre_score(aspect, &mut rng);
        let n = usize::from(5 - score).min(s.facts.len());
        let errors = rand::seq::index::sample(&mut rng, s.facts.len(), n).into_vec();
        s.caption_with_errors(&errors)
    }

    fn revise(&self, req: &ModelRequest, pre: &str, critique_text: &str, state: &mut MockState) -> String {
        if is_no_edit(critique_text) {
            return pre.to_string();
        }
        let Ok(mut critique) = StructuredCritique::parse(critique_text) else {
            return pre.to_string();
        };
        let aspect = aspect_of_caption(pre);
        let key = (req.media_uri.clone().unwrap_or_default(), aspect);
        let seen = state.revisions.entry(key).or_insert(0);
        *seen += 1;
        let first = *seen == 1;
        let fix_count = critique.fixes().count();
        if first && fix_count > 0 {
            if let (Some(uri), Some(a)) = (req.media_uri.as_deref(), aspect) {
                let s = self.scenario(uri, a);
                let mut rng = seeded_rng(self.config.seed, &["residual", uri, a.as_str()]);
                if rng.gen::<f64>() < s.convergence_residual {
                    let skip = critique.points.iter().rposition(|p| p.fix.is_some()).expect("fix_count > 0");
                    critique.points[skip].fix = None;
                }
            }
        }
        apply_edit_script(pre, &critique).text
    }

    /// Critique of `caption`. Sighted critics see the world and catch each
    /// error with the configured recall; blind critics guess.
    fn critique_of(&self, req: &ModelRequest, aspect: Option<AspectKind>, caption: &str, sighted: bool) -> StructuredCritique {
        let mut rng = self.rng(req, &["critique", caption]);
        let aspect = aspect.or_else(|| aspect_of_caption(caption));
        if !sighted {
            let Some(a) = aspect else {
                return StructuredCritique::no_edit();
            };
            let present: Vec<(&str, &str)> = fact_pool(a)
                .iter()
                .filter_map(|f| {
                    if caption.contains(f.correct) {
                        Some((f.correct, f.wrong))
                    } else if caption.contains(f.wrong) {
                        Some((f.wrong, f.correct))
                    } else {
                        None
                    }
                })
                .collect();
            if present.is_empty() {
                return StructuredCritique::no_edit();
            }
            let (from, to) = present[rng.gen_range(0..present.len())];
            return StructuredCritique::from_points(vec![replace_point(from, to)]);
        }
        let Some(s) = self.world(req, aspect, caption) else {
            return StructuredCritique::no_edit();
        };
        let mut points = Vec::new();
        for i in s.errors_in(caption) {
            if rng.gen::<f64>() >= self.config.critique_recall {
                continue;
            }
            let fact = s.facts[i];
            if caption.contains(fact.wrong) {
                points.push(replace_point(fact.wrong, fact.correct));
            } else {
                points.push(CritiquePoint::new(
                    "The caption leaves out a visible detail.",
                    Some(Fix::Append { text: fact.render(fact.correct) }),
                ));
            }
        }
        if points.is_empty() {
            StructuredCritique::no_edit()
        } else {
            StructuredCritique::from_points(points)
        }
    }

    fn caption_format(&self, req: &ModelRequest, instruction: &str, caption: &str, critique_text: Option<&str>, question: &str) -> Reply {
        let aspect = instructions::aspect_of_instruction(instruction);
        let world = self.world(req, aspect, caption);
        let errors = world.as_ref().map(|s| s.errors_in(caption).len());
        let mut rng = self.rng(req, &["format"]);
        let jitter = if req.temperature > 0.0 { rng.gen_range(-0.8..0.8) } else { 0.0 };
        if question.starts_with(instructions::CAPTION_REWARD) {
            let base = match errors {
                Some(e) => 2.5 - 1.6 * e as f64,
                None => 0.0,
            };
            return Reply::score(sigmoid(base + jitter));
        }
        if question.starts_with(instructions::CRITIQUE_REWARD) {
            let q = match (&world, critique_text.map(StructuredCritique::parse)) {
                (Some(s), Some(Ok(c))) => critique_quality(s, caption, &c),
                _ => 0.0,
            };
            return Reply::score(sigmoid(4.0 * q - 1.0 + jitter));
        }
        if question.starts_with(instructions::CAPTION_SCORING) {
            return match world {
                Some(s) => Reply::text(format!("Score: {}", s.score_of(caption))),
                None => Reply::text("Score: 3"),
            };
        }
        if question.starts_with(instructions::CRITIQUE_GEN) {
            return Reply::text(self.critique_of(req, aspect, caption, req.media_uri.is_some()).render());
        }
        if question.starts_with(instructions::CAPTION_REVISION_WITH_CRITIQUE) {
            let revised = match critique_text.map(StructuredCritique::parse) {
                Some(Ok(c)) => apply_edit_script(caption, &c).text,
                _ => caption.to_string(),
            };
            return Reply::text(revised);
        }
        if question.starts_with(instructions::CAPTION_REVISION) {
            let Some(s) = world else {
                return Reply::text(caption);
            };
            let mut text = caption.to_string();
            for i in s.errors_in(caption) {
                if rng.gen::<f64>() < self.config.self_fix_rate {
                    let fact = s.facts[i];
                    let fix = if text.contains(fact.wrong) {
                        Fix::Replace { target: fact.wrong.into(), with: fact.correct.into() }
                    } else {
                        Fix::Append { text: fact.render(fact.correct) }
                    };
                    super::apply_fix(&mut text, &fix);
                }
            }
            return Reply::text(text);
        }
        if question.starts_with(instructions::CRITIQUE_BASED_REVISION) {
            let c = self.critique_of(req, aspect, caption, req.media_uri.is_some());
            let revised = apply_edit_script(caption, &c).text;
            return Reply::text(format!("Critique: {}\nImproved Caption: {}", c.render().replace('\n', " "), revised));
        }
        Reply::text("OK")
    }

    fn degradation(&self, req: &ModelRequest, kind: DegradationKind) -> String {
        let feedback = between(&req.prompt, "Original Feedback: ", "\n\nInstructions:").unwrap_or("");
        let seed = u64::from_le_bytes(Sha256::digest(req.idempotency_key.as_bytes())[..8].try_into().expect("8 bytes"));
        match StructuredCritique::parse(feedback) {
            Ok(c) => critique::degrade_structured(&c, kind, seed ^ self.config.seed).render(),
            Err(_) if kind == DegradationKind::Insertion => {
                let extra = critique::fabricated_points()[(seed % critique::fabricated_points().len() as u64) as usize].clone();
                format!("{} {}", feedback.trim_end(), extra.claim)
            }
            Err(_) => feedback.to_string(),
        }
    }

    fn respond(&self, req: &ModelRequest, reply: Reply) -> Result<ModelResponse, GatewayError> {
        let candidates = match (req.kind, reply.p_yes) {
            (RequestKind::Generate, _) => Vec::new(),
            (RequestKind::Score, _) if !self.config.logprobs => Vec::new(),
            (RequestKind::Score, _) if self.config.score_override.is_some() => {
                normalize_candidates(self.config.score_override.clone().expect("checked"))?
            }
            (RequestKind::Score, p) => {
                let p = p.unwrap_or(0.5).clamp(1e-6, 1.0 - 1e-6);
                let mut c = normalize_candidates(vec![
                    TokenLogprob::new("Yes", p.ln()),
                    TokenLogprob::new("No", (1.0 - p).ln()),
                    TokenLogprob::new("yes", p.ln() - 4.0),
                    TokenLogprob::new("no", (1.0 - p).ln() - 4.0),
                    TokenLogprob::new("The", -12.0),
                ])?;
                c.truncate(req.top_logprobs.max(2) as usize);
                c
            }
        };
        let text = match (req.kind, &self.config.score_override) {
            (RequestKind::Score, Some(c)) => c.iter().max_by(|a, b| a.logprob.total_cmp(&b.logprob)).map(|t| t.token.clone()).unwrap_or_default(),
            _ => reply.text,
        };
        Ok(ModelResponse { text, first_token_candidates: candidates, latency: Duration::ZERO, provider_id: "mock".into() })
    }
}

fn replace_point(from: &str, to: &str) -> CritiquePoint {
    CritiquePoint::new(
        format!("The caption says {from}, but it should be {to}."),
        Some(Fix::Replace { target: from.into(), with: to.into() }),
    )
}

/// Fraction of real errors a critique fixes, minus a penalty for fixes
/// that would damage correct content.
fn critique_quality(s: &MockScenario, caption: &str, c: &StructuredCritique) -> f64 {
    let errors = s.errors_in(caption);
    if c.canonical_no_edit {
        return if errors.is_empty() { 1.0 } else { -0.5 };
    }
    let revised = apply_edit_script(caption, c).text;
    let after = s.errors_in(&revised);
    let fixed = errors.iter().filter(|e| !after.contains(e)).count() as f64;
    let broken = after.iter().filter(|e| !errors.contains(e)).count() as f64;
    let bogus = c.points.iter().filter(|p| p.fix.is_none()).count() as f64 * 0.25;
    if errors.is_empty() {
        return if broken == 0.0 && c.points.is_empty() { 1.0 } else { -0.5 - broken };
    }
    (fixed - broken - bogus) / errors.len() as f64
}

/// Aspect of an App.-J style pre-caption prompt, from its opening.
fn precaption_aspect(prompt: &str) -> Option<AspectKind> {
    let head: String = prompt.chars().take(240).collect();
    let markers: [(&str, AspectKind); 7] = [
        ("describe the subject motion", AspectKind::Motion),
        ("subject's motion", AspectKind::Motion),
        ("describe the subject.", AspectKind::Subject),
        ("description of the subjects in this video", AspectKind::Subject),
        ("overall scene", AspectKind::Scene),
        ("spatially framed", AspectKind::Spatial),
        ("camera's configuration", AspectKind::Camera),
    ];
    markers.iter().find(|(m, _)| head.contains(m)).map(|(_, a)| *a)
}

impl ModelClient for MockModel {
    fn generate(&self, req: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        req.validate()?;
        let mut state = self.state.lock();
        let index = state.transcript.len();
        let prompt_digest = digest(&req.prompt);
        let (resp, cached) = match state.cache.get(&req.idempotency_key) {
            Some(hit) => (hit.clone(), true),
            None => {
                let reply = self.route(req, &mut state);
                let resp = self.respond(req, reply)?;
                state.cache.insert(req.idempotency_key.clone(), resp.clone());
                (resp, false)
            }
        };
        state.transcript.push(TranscriptEntry {
            index,
            kind: req.kind,
            idempotency_key: req.idempotency_key.clone(),
            prompt_digest,
            response_digest: digest(&resp.text),
            cached,
        });
        Ok(resp)
    }
}
