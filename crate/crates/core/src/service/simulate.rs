//! Runs synthetic videos through the whole loop with scripted annotators and
//! reviewers who can see the mock's ground truth.

use rand::Rng;
use serde::Serialize;

use super::ingest::VIDEOS_PER_SET;
use super::stats::{compute_stats, StatsReport};
use super::{Service, ServiceError};
use crate::critique::{CritiquePoint, Fix, StructuredCritique};
use crate::gateway::{MockConfig, MockModel, MockScenario};
use crate::schema::{AspectKind, PrimitiveLabelRecord};
use crate::seed::seeded_rng;
use crate::triplet::NO_EDIT_CRITIQUE;
use crate::workflow::{settle_ledger, Actor, BonusLedgerEntry, ItemState, ReviewDecision, Role, WorkflowItem, WorkflowStore};

/// Mean self-reported minutes per aspect the simulated annotators draw around.
pub const TABLE5_MINUTES: [f64; 5] = [3.0, 3.0, 2.0, 5.0, 2.0];

/// Subject and scene before motion and spatial; camera has no dependency.
const ORDER: [AspectKind; 5] = [AspectKind::Subject, AspectKind::Scene, AspectKind::Camera, AspectKind::Motion, AspectKind::Spatial];

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub videos: usize,
    pub seed: u64,
    pub mock: MockConfig,
    /// Chance an annotator overlooks one error and submits it.
    pub annotator_miss_rate: f64,
}

impl SimConfig {
    pub fn new(videos: usize, seed: u64) -> Self {
        Self { videos, seed, mock: MockConfig::new(seed), annotator_miss_rate: 0.03 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutcome {
    pub stats: StatsReport,
    pub ledger: Vec<BonusLedgerEntry>,
    pub model_calls: usize,
    pub events: usize,
}

fn correction(s: &MockScenario, caption: &str, skip: Option<usize>) -> Option<String> {
    let points: Vec<CritiquePoint> = s
        .errors_in(caption)
        .into_iter()
        .filter(|i| Some(*i) != skip)
        .filter(|i| caption.contains(s.facts[*i].wrong))
        .map(|i| {
            let f = &s.facts[i];
            CritiquePoint::new(
                format!("\"{}\" is wrong; it is \"{}\".", f.wrong, f.correct),
                Some(Fix::Replace { target: f.wrong.into(), with: f.correct.into() }),
            )
        })
        .collect();
    (!points.is_empty()).then(|| StructuredCritique::from_points(points).render())
}

fn run_item(svc: &mut Service<MockModel>, cfg: &SimConfig, id: &str, ann: &Actor, rev: &Actor) -> Result<(), ServiceError> {
    let sys = Actor::system();
    svc.mutate(|wf| wf.generate_precaption(id, &sys, None))?;
    let item = svc.store().get(id)?.clone();
    let s = svc.workflow().client().scenario(&item.media_uri, item.aspect);
    let mut rng = seeded_rng(cfg.seed, &["annotator", id]);
    let pre_score = s.score_of(&item.current.pre_caption);
    let initial_errors = s.errors_in(&item.current.pre_caption);
    let missed = (rng.gen::<f64>() < cfg.annotator_miss_rate).then(|| initial_errors.last().copied()).flatten();
    let minutes = TABLE5_MINUTES[item.aspect as usize] * rng.gen_range(0.75..1.25);

    let mut first = true;
    loop {
        let caption = svc.store().get(id)?.working_caption().to_string();
        let critique = match correction(&s, &caption, missed) {
            Some(c) => c,
            None if first => NO_EDIT_CRITIQUE.to_string(),
            None => break,
        };
        first = false;
        svc.mutate(|wf| wf.submit_critique(id, &critique, ann, None))?;
        match svc.store().get(id)?.state {
            ItemState::InReview => break,
            _ => {
                let caption = svc.store().get(id)?.working_caption().to_string();
                if correction(&s, &caption, missed).is_some() {
                    svc.mutate(|wf| wf.reopen(id, ann, None))?;
                } else {
                    break;
                }
            }
        }
    }

    loop {
        let item = svc.store().get(id)?.clone();
        match item.state {
            ItemState::Accepted => return Ok(()),
            ItemState::PostCaptioned => {
                svc.mutate(|wf| wf.finalize(id, pre_score, Some(minutes), ann, None))?;
                svc.mutate(|wf| wf.submit(id, ann, None))?;
            }
            ItemState::Submitted | ItemState::InReview => match correction(&s, item.working_caption(), None) {
                None => {
                    svc.mutate(|wf| wf.review(id, ReviewDecision::Approve, None, rev, None))?;
                }
                Some(fix) => {
                    svc.mutate(|wf| wf.review(id, ReviewDecision::Reject, Some(&fix), rev, None))?;
                }
            },
            ItemState::Rejected => {
                let fix = item.current.final_critique().unwrap_or(NO_EDIT_CRITIQUE).to_string();
                svc.mutate(|wf| wf.submit_critique(id, &fix, ann, None))?;
            }
            other => unreachable!("simulated item stuck in {other:?}"),
        }
    }
}

/// Simulates `cfg.videos` videos in memory and reports statistics.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutcome, ServiceError> {
    let mut svc = Service::in_memory(MockModel::new(cfg.mock.clone()));
    simulate_into(&mut svc, cfg)
}

/// Like [`simulate`], but also hands back the final store.
pub fn simulate_store(cfg: &SimConfig) -> Result<(SimOutcome, WorkflowStore), ServiceError> {
    let mut svc = Service::in_memory(MockModel::new(cfg.mock.clone()));
    let out = simulate_into(&mut svc, cfg)?;
    Ok((out, svc.store().clone()))
}

pub(crate) fn simulate_into(svc: &mut Service<MockModel>, cfg: &SimConfig) -> Result<SimOutcome, ServiceError> {
    let rev = Actor::new(Role::Reviewer, "reviewer-0");
    for v in 0..cfg.videos {
        let set = v / VIDEOS_PER_SET;
        let video_id = format!("sim-{:05}", v);
        let record = PrimitiveLabelRecord::new(&video_id, format!("mem://{video_id}"));
        let set_id = format!("set-{set:04}");
        svc.mutate(|wf| wf.ingest_record(&record, &set_id))?;
        let ann = Actor::new(Role::Annotator, format!("annotator-{}", set % 4));
        for aspect in ORDER {
            run_item(svc, cfg, &WorkflowItem::item_id_for(&video_id, aspect), &ann, &rev)?;
        }
    }
    let store = svc.store();
    let sets: std::collections::BTreeSet<&str> = store.items.values().map(|i| i.set_id.as_str()).collect();
    let ledger = sets.into_iter().filter_map(|s| settle_ledger(store, s).ok()).flatten().collect();
    Ok(SimOutcome { stats: compute_stats(store), ledger, model_calls: svc.workflow().client().calls(), events: svc.workflow().log().len() })
}
