//! The transition function and log replay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AccuracyMark, Actor, CritiqueEntry, EventKind, ItemState, ReviewDecision, Role, WorkflowError, WorkflowEvent, WorkflowItem, DEFAULT_ITERATION_CAP};
use crate::schema::AspectKind;
use crate::triplet::{is_no_edit, AspectTriplet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowStore {
    pub items: BTreeMap<String, WorkflowItem>,
    pub last_event_id: u64,
    pub iteration_cap: u32,
}

impl Default for WorkflowStore {
    fn default() -> Self {
        Self::new(DEFAULT_ITERATION_CAP)
    }
}

fn need(state: ItemState, allowed: &[ItemState], op: &'static str) -> Result<(), WorkflowError> {
    if allowed.contains(&state) {
        Ok(())
    } else {
        Err(WorkflowError::InvalidTransition { state, op })
    }
}

fn role(actor: &Actor, allowed: &[Role], op: &str) -> Result<(), WorkflowError> {
    if allowed.contains(&actor.role) {
        Ok(())
    } else {
        Err(WorkflowError::RoleViolation(format!("{:?} cannot {op}", actor.role)))
    }
}

impl WorkflowStore {
    pub fn new(iteration_cap: u32) -> Self {
        Self { items: BTreeMap::new(), last_event_id: 0, iteration_cap }
    }

    pub fn get(&self, item_id: &str) -> Result<&WorkflowItem, WorkflowError> {
        self.items.get(item_id).ok_or_else(|| WorkflowError::NotFound(item_id.to_string()))
    }

    pub fn sibling(&self, item: &WorkflowItem, aspect: AspectKind) -> Option<&WorkflowItem> {
        self.items.get(&WorkflowItem::item_id_for(&item.video_id, aspect))
    }

    /// Motion and spatial pre-captions embed the accepted subject and scene captions.
    pub fn ordering_gate(&self, item: &WorkflowItem) -> Result<(), WorkflowError> {
        if !matches!(item.aspect, AspectKind::Motion | AspectKind::Spatial) {
            return Ok(());
        }
        for needs in [AspectKind::Subject, AspectKind::Scene] {
            if self.sibling(item, needs).is_none_or(|s| s.state != ItemState::Accepted) {
                return Err(WorkflowError::OrderingViolation { item: item.item_id.clone(), needs: needs.as_str().into() });
            }
        }
        Ok(())
    }

    /// Validates `event` against the current state and applies it.
    pub fn apply(&mut self, event: &WorkflowEvent) -> Result<(), WorkflowError> {
        if event.event_id <= self.last_event_id {
            return Err(WorkflowError::CorruptLog(format!(
                "event id {} not after {}",
                event.event_id, self.last_event_id
            )));
        }
        let next = self.transition(event)?;
        self.items.insert(next.item_id.clone(), next);
        self.last_event_id = event.event_id;
        Ok(())
    }

    fn transition(&self, event: &WorkflowEvent) -> Result<WorkflowItem, WorkflowError> {
        use ItemState::*;
        let actor = &event.actor;
        if let EventKind::Created { video_id, aspect, set_id, media_uri } = &event.kind {
            if self.items.contains_key(&event.item_id) {
                return Err(WorkflowError::Duplicate(event.item_id.clone()));
            }
            if event.parent_version != 0 {
                return Err(WorkflowError::CorruptLog(format!("{} created at version {}", event.item_id, event.parent_version)));
            }
            return Ok(WorkflowItem {
                item_id: event.item_id.clone(),
                video_id: video_id.clone(),
                aspect: *aspect,
                set_id: set_id.clone(),
                media_uri: media_uri.clone(),
                state: Created,
                iteration: 0,
                version: 1,
                current: AspectTriplet::default(),
                record: None,
                critique_log: Vec::new(),
                annotator: None,
                reviewer: None,
                escalated: false,
                finalized: false,
                reviews: 0,
                first_pass: None,
                marks: Vec::new(),
                retried_formatting: 0,
                minutes: None,
            });
        }

        let current = self.get(&event.item_id)?;
        if event.parent_version != current.version {
            return Err(WorkflowError::CorruptLog(format!(
                "{}: parent_version {} but item is at {}",
                event.item_id, event.parent_version, current.version
            )));
        }
        if current.state.is_terminal() {
            return Err(WorkflowError::ImmutableItem(event.item_id.clone()));
        }
        let mut item = current.clone();
        item.version += 1;

        match &event.kind {
            EventKind::Created { .. } => unreachable!(),
            EventKind::PrimitivesAttached { record } => {
                need(item.state, &[Created, PrimitivesReady], "attach primitives")?;
                role(actor, &[Role::System, Role::Manager], "attach primitives")?;
                if record.video_id != item.video_id {
                    return Err(WorkflowError::InvalidInput(format!("record for {} attached to {}", record.video_id, item.video_id)));
                }
                item.record = Some((**record).clone());
                item.state = PrimitivesReady;
            }
            EventKind::RetriedFormatting { .. } => {
                need(item.state, &[PrimitivesReady], "retry formatting")?;
                self.ordering_gate(&item)?;
                item.retried_formatting += 1;
            }
            EventKind::PreCaptioned { text, .. } => {
                need(item.state, &[PrimitivesReady], "pre-caption")?;
                role(actor, &[Role::System, Role::Annotator], "pre-caption")?;
                self.ordering_gate(&item)?;
                item.current.pre_caption = text.clone();
                item.state = PreCaptioned;
            }
            EventKind::CritiqueSubmitted { critique, post_caption } => {
                need(item.state, &[PreCaptioned, AwaitingCritique, Rejected], "critique")?;
                self.claim_annotator(&mut item, actor)?;
                if item.iteration >= self.iteration_cap {
                    return Err(WorkflowError::InvalidInput(format!("iteration cap {} reached; escalate", self.iteration_cap)));
                }
                if is_no_edit(critique) && post_caption != item.working_caption() {
                    return Err(WorkflowError::InvalidInput("no-edit critique must keep the caption unchanged".into()));
                }
                item.critique_log.push(CritiqueEntry { text: critique.clone(), author: actor.clone() });
                item.current.critiques.push(critique.clone());
                item.current.post_caption = Some(post_caption.clone());
                item.iteration += 1;
                item.finalized = false;
                item.state = PostCaptioned;
            }
            EventKind::EscalateToReviewer { critique } => {
                need(item.state, &[PreCaptioned, AwaitingCritique, Rejected], "escalate")?;
                self.claim_annotator(&mut item, actor)?;
                if item.iteration < self.iteration_cap {
                    return Err(WorkflowError::InvalidInput("escalation before the iteration cap".into()));
                }
                item.critique_log.push(CritiqueEntry { text: critique.clone(), author: actor.clone() });
                item.current.critiques.push(critique.clone());
                if item.current.post_caption.is_none() {
                    item.current.post_caption = Some(item.current.pre_caption.clone());
                }
                item.escalated = true;
                item.state = InReview;
            }
            EventKind::Reopened => {
                need(item.state, &[PostCaptioned], "reopen")?;
                self.claim_annotator(&mut item, actor)?;
                item.finalized = false;
                item.state = AwaitingCritique;
            }
            EventKind::Finalized { score, minutes } => {
                need(item.state, &[PostCaptioned], "finalize")?;
                self.claim_annotator(&mut item, actor)?;
                if !(1..=5).contains(score) {
                    return Err(WorkflowError::InvalidInput(format!("score {score} outside 1..5")));
                }
                if minutes.is_some_and(|m| !m.is_finite() || m < 0.0) {
                    return Err(WorkflowError::InvalidInput("minutes must be a non-negative number".into()));
                }
                item.current.human_score = Some(*score);
                if minutes.is_some() {
                    item.minutes = *minutes;
                }
                item.finalized = true;
            }
            EventKind::Submitted => {
                need(item.state, &[PostCaptioned], "submit")?;
                self.claim_annotator(&mut item, actor)?;
                if !item.finalized {
                    return Err(WorkflowError::InvalidInput("finalize before submitting".into()));
                }
                item.state = Submitted;
            }
            EventKind::Reviewed { decision, corrections, revised } => {
                need(item.state, &[Submitted, InReview], "review")?;
                role(actor, &[Role::Reviewer], "review")?;
                if item.annotator.as_deref() == Some(actor.user_id.as_str()) {
                    return Err(WorkflowError::RoleViolation(format!("{} cannot review their own item", actor.user_id)));
                }
                item.reviewer = Some(actor.user_id.clone());
                item.reviews += 1;
                if item.first_pass.is_none() {
                    item.first_pass = Some(*decision == ReviewDecision::Approve);
                }
                match decision {
                    ReviewDecision::Approve => item.state = Accepted,
                    ReviewDecision::Reject => {
                        let Some(c) = corrections.as_deref().filter(|c| !c.trim().is_empty()) else {
                            return Err(WorkflowError::InvalidInput("a rejection needs corrections".into()));
                        };
                        item.critique_log.push(CritiqueEntry { text: c.to_string(), author: actor.clone() });
                        item.current.critiques.push(c.to_string());
                        item.marks.push(AccuracyMark { reason: "review_rejection".into(), delta: -1 });
                        item.finalized = false;
                        if item.escalated {
                            let Some(r) = revised else {
                                return Err(WorkflowError::InvalidInput("escalated rejection needs the revised caption".into()));
                            };
                            item.current.post_caption = Some(r.clone());
                            item.state = InReview;
                        } else {
                            item.state = Rejected;
                        }
                    }
                }
            }
            EventKind::Appealed { .. } => {
                need(item.state, &[Rejected], "appeal")?;
                role(actor, &[Role::Annotator], "appeal")?;
                if item.annotator.as_deref() != Some(actor.user_id.as_str()) {
                    return Err(WorkflowError::RoleViolation(format!("{} is not the annotator of {}", actor.user_id, item.item_id)));
                }
                item.state = Appealed;
            }
            EventKind::AppealResolved { accept, .. } => {
                need(item.state, &[Appealed], "resolve appeal")?;
                role(actor, &[Role::Manager], "resolve appeal")?;
                if *accept {
                    item.marks.push(AccuracyMark { reason: "appeal_reversal".into(), delta: 1 });
                    if item.critique_log.last().is_some_and(|c| c.author.role == Role::Reviewer) {
                        item.critique_log.pop();
                        item.current.critiques.pop();
                    }
                    item.state = Accepted;
                } else {
                    item.state = ManagerResolved;
                }
            }
        }
        Ok(item)
    }

    fn claim_annotator(&self, item: &mut WorkflowItem, actor: &Actor) -> Result<(), WorkflowError> {
        role(actor, &[Role::Annotator], "edit captions")?;
        match &item.annotator {
            Some(a) if *a != actor.user_id => {
                Err(WorkflowError::RoleViolation(format!("{} is assigned to {a}", item.item_id)))
            }
            Some(_) => Ok(()),
            None => {
                item.annotator = Some(actor.user_id.clone());
                Ok(())
            }
        }
    }
}

/// Rebuilds a store from `base` and the events after it. Any out-of-order,
/// duplicated or skipped version is `CorruptLog`.
pub fn replay(base: WorkflowStore, events: &[WorkflowEvent]) -> Result<WorkflowStore, WorkflowError> {
    let mut store = base;
    for ev in events {
        if let Some(item) = store.items.get(&ev.item_id) {
            if ev.parent_version != item.version && !matches!(ev.kind, EventKind::Created { .. }) {
                return Err(WorkflowError::CorruptLog(format!(
                    "event {}: {} parent_version {} but item is at {}",
                    ev.event_id, ev.item_id, ev.parent_version, item.version
                )));
            }
        }
        store.apply(ev).map_err(|e| match e {
            WorkflowError::CorruptLog(m) => WorkflowError::CorruptLog(m),
            other => WorkflowError::CorruptLog(format!("event {} rejected: {other}", ev.event_id)),
        })?;
    }
    Ok(store)
}
