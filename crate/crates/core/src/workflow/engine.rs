//! Operations that produce events, calling the model where a step needs one.

use std::time::{SystemTime, UNIX_EPOCH};

use super::{Actor, EventKind, ItemState, ReviewDecision, Role, WorkflowError, WorkflowEvent, WorkflowItem, WorkflowStore};
use crate::gateway::{ModelClient, ModelRequest};
use crate::instructions::{revision_prompt, NO_FRAME_INSTRUCTION};
use crate::prompts::{build_prompt, PolicyContext};
use crate::schema::{AspectKind, PrimitiveLabelRecord};
use crate::triplet::is_no_edit;

const FRAME_PATTERNS: [&str; 3] = ["first frame", "second frame", "last frame"];

pub fn mentions_frame(text: &str) -> bool {
    let lower = text.to_lowercase();
    FRAME_PATTERNS.iter().any(|p| lower.contains(p))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Store plus event log, driving the model for pre-captions and revisions.
pub struct Workflow<C> {
    store: WorkflowStore,
    log: Vec<WorkflowEvent>,
    client: C,
}

impl<C: ModelClient> Workflow<C> {
    pub fn new(client: C) -> Self {
        Self::with_store(client, WorkflowStore::default(), Vec::new())
    }

    pub fn with_store(client: C, store: WorkflowStore, log: Vec<WorkflowEvent>) -> Self {
        Self { store, log, client }
    }

    pub fn store(&self) -> &WorkflowStore {
        &self.store
    }

    pub fn log(&self) -> &[WorkflowEvent] {
        &self.log
    }

    pub fn client(&self) -> &C {
        &self.client
    }

    pub fn item(&self, item_id: &str) -> Result<&WorkflowItem, WorkflowError> {
        self.store.get(item_id)
    }

    fn checked(&self, item_id: &str, expected: Option<u64>) -> Result<&WorkflowItem, WorkflowError> {
        let item = self.store.get(item_id)?;
        if let Some(v) = expected {
            if v != item.version {
                return Err(WorkflowError::VersionConflict { expected: v, actual: item.version });
            }
        }
        if item.state.is_terminal() {
            return Err(WorkflowError::ImmutableItem(item_id.to_string()));
        }
        Ok(item)
    }

    /// Applies `kinds` in order to one item. All or nothing: on a rejected
    /// event the store is left as it was.
    fn commit(&mut self, item_id: &str, actor: &Actor, kinds: Vec<EventKind>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        let saved = (self.store.items.get(item_id).cloned(), self.store.last_event_id);
        let mut events = Vec::with_capacity(kinds.len());
        for kind in kinds {
            let parent_version = self.store.items.get(item_id).map_or(0, |i| i.version);
            let ev = WorkflowEvent {
                event_id: self.store.last_event_id + 1,
                item_id: item_id.to_string(),
                actor: actor.clone(),
                kind,
                timestamp: now_ms(),
                parent_version,
            };
            if let Err(e) = self.store.apply(&ev) {
                match saved.0 {
                    Some(item) => self.store.items.insert(item_id.to_string(), item),
                    None => self.store.items.remove(item_id),
                };
                self.store.last_event_id = saved.1;
                return Err(e);
            }
            events.push(ev);
        }
        self.log.extend(events.iter().cloned());
        Ok(events)
    }

    pub fn create_item(&mut self, video_id: &str, aspect: AspectKind, set_id: &str, media_uri: &str) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        let id = WorkflowItem::item_id_for(video_id, aspect);
        let kind = EventKind::Created { video_id: video_id.into(), aspect, set_id: set_id.into(), media_uri: media_uri.into() };
        self.commit(&id, &Actor::system(), vec![kind])
    }

    /// Creates the five aspect items for a labeled video, or attaches a newer
    /// label revision to items that have not been pre-captioned yet.
    pub fn ingest_record(&mut self, record: &PrimitiveLabelRecord, set_id: &str) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        let mut out = Vec::new();
        for &aspect in AspectKind::ALL {
            let id = WorkflowItem::item_id_for(&record.video_id, aspect);
            if !self.store.items.contains_key(&id) {
                out.extend(self.create_item(&record.video_id, aspect, set_id, &record.media_uri)?);
            }
            let kind = EventKind::PrimitivesAttached { record: Box::new(record.clone()) };
            out.extend(self.commit(&id, &Actor::system(), vec![kind])?);
        }
        Ok(out)
    }

    pub fn generate_precaption(&mut self, item_id: &str, actor: &Actor, expected: Option<u64>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        let item = self.checked(item_id, expected)?;
        if item.state != ItemState::PrimitivesReady {
            return Err(WorkflowError::InvalidTransition { state: item.state, op: "pre-caption" });
        }
        self.store.ordering_gate(item)?;
        let record = item.record.clone().expect("PrimitivesReady carries a record");
        let mut ctx = PolicyContext::new(record);
        if matches!(item.aspect, AspectKind::Motion | AspectKind::Spatial) {
            let cap = |a| self.store.sibling(item, a).and_then(|s| s.current.post_caption.clone()).unwrap_or_default();
            ctx = ctx.with_captions(cap(AspectKind::Subject), cap(AspectKind::Scene));
        }
        let prompt = build_prompt(item.aspect, &ctx)?;
        let key = format!("{item_id}:pre:{}", item.version);
        let req = ModelRequest::generate(&prompt.text, &key).with_media(Some(&item.media_uri));
        let text = self.client.generate(&req)?.text.trim().to_string();

        let mut kinds = Vec::new();
        let text = if mentions_frame(&text) {
            let retry = ModelRequest::generate(format!("{}\n\n{NO_FRAME_INSTRUCTION}", prompt.text), format!("{key}:retry"))
                .with_media(Some(&item.media_uri));
            let again = self.client.generate(&retry)?.text.trim().to_string();
            kinds.push(EventKind::RetriedFormatting { rejected: text });
            again
        } else {
            text
        };
        kinds.push(EventKind::PreCaptioned { text, prompt_digest: prompt.inputs_digest });
        self.commit(item_id, actor, kinds)
    }

    /// Records a critique and the revision it produces. The no-edit sentence
    /// copies the caption without a model call; past the iteration cap the
    /// item escalates to a reviewer instead.
    pub fn submit_critique(&mut self, item_id: &str, critique: &str, actor: &Actor, expected: Option<u64>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        let item = self.checked(item_id, expected)?;
        if !matches!(item.state, ItemState::PreCaptioned | ItemState::AwaitingCritique | ItemState::Rejected) {
            return Err(WorkflowError::InvalidTransition { state: item.state, op: "critique" });
        }
        if critique.trim().is_empty() {
            return Err(WorkflowError::InvalidInput("empty critique".into()));
        }
        if actor.role != Role::Annotator {
            return Err(WorkflowError::RoleViolation(format!("{:?} cannot critique", actor.role)));
        }
        if item.iteration >= self.store.iteration_cap {
            return self.commit(item_id, actor, vec![EventKind::EscalateToReviewer { critique: critique.into() }]);
        }
        let post_caption = if is_no_edit(critique) {
            item.working_caption().to_string()
        } else {
            let key = format!("{item_id}:rev:{}", item.version);
            let req = ModelRequest::generate(revision_prompt(item.working_caption(), critique), key).with_media(Some(&item.media_uri));
            self.client.generate(&req)?.text.trim().to_string()
        };
        self.commit(item_id, actor, vec![EventKind::CritiqueSubmitted { critique: critique.into(), post_caption }])
    }

    pub fn reopen(&mut self, item_id: &str, actor: &Actor, expected: Option<u64>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        self.checked(item_id, expected)?;
        self.commit(item_id, actor, vec![EventKind::Reopened])
    }

    pub fn finalize(&mut self, item_id: &str, score: u8, minutes: Option<f64>, actor: &Actor, expected: Option<u64>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        self.checked(item_id, expected)?;
        self.commit(item_id, actor, vec![EventKind::Finalized { score, minutes }])
    }

    pub fn submit(&mut self, item_id: &str, actor: &Actor, expected: Option<u64>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        self.checked(item_id, expected)?;
        self.commit(item_id, actor, vec![EventKind::Submitted])
    }

    /// Approve or reject. Rejecting an escalated item applies the reviewer's
    /// corrections directly and keeps it in review.
    pub fn review(
        &mut self,
        item_id: &str,
        decision: ReviewDecision,
        corrections: Option<&str>,
        actor: &Actor,
        expected: Option<u64>,
    ) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        let item = self.checked(item_id, expected)?;
        let mut revised = None;
        if decision == ReviewDecision::Reject && item.escalated && matches!(item.state, ItemState::Submitted | ItemState::InReview) {
            if let Some(c) = corrections.filter(|c| !c.trim().is_empty() && actor.role == Role::Reviewer) {
                revised = Some(if is_no_edit(c) {
                    item.working_caption().to_string()
                } else {
                    let key = format!("{item_id}:review:{}", item.version);
                    let req = ModelRequest::generate(revision_prompt(item.working_caption(), c), key).with_media(Some(&item.media_uri));
                    self.client.generate(&req)?.text.trim().to_string()
                });
            }
        }
        let kind = EventKind::Reviewed { decision, corrections: corrections.map(str::to_string), revised };
        self.commit(item_id, actor, vec![kind])
    }

    pub fn appeal(&mut self, item_id: &str, note: &str, actor: &Actor, expected: Option<u64>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        self.checked(item_id, expected)?;
        self.commit(item_id, actor, vec![EventKind::Appealed { note: note.into() }])
    }

    pub fn resolve_appeal(&mut self, item_id: &str, accept: bool, note: Option<&str>, actor: &Actor, expected: Option<u64>) -> Result<Vec<WorkflowEvent>, WorkflowError> {
        self.checked(item_id, expected)?;
        self.commit(item_id, actor, vec![EventKind::AppealResolved { accept, note: note.map(str::to_string) }])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{MockConfig, MockModel};
    use crate::triplet::NO_EDIT_CRITIQUE;
    use crate::workflow::replay;

    fn ann() -> Actor {
        Actor::new(Role::Annotator, "ann")
    }

    fn rev() -> Actor {
        Actor::new(Role::Reviewer, "rev")
    }

    fn flow(config: MockConfig) -> Workflow<MockModel> {
        let mut wf = Workflow::new(MockModel::new(config));
        wf.ingest_record(&PrimitiveLabelRecord::new("v1", "mem://v1"), "s1").unwrap();
        wf
    }

    fn quiet() -> MockConfig {
        MockConfig { frame_mention_rate: 0.0, convergence_profile: [0.0; 5], ..MockConfig::new(1) }
    }

    fn accept(wf: &mut Workflow<MockModel>, id: &str) {
        wf.generate_precaption(id, &Actor::system(), None).unwrap();
        wf.submit_critique(id, NO_EDIT_CRITIQUE, &ann(), None).unwrap();
        wf.finalize(id, 5, None, &ann(), None).unwrap();
        wf.submit(id, &ann(), None).unwrap();
        wf.review(id, ReviewDecision::Approve, None, &rev(), None).unwrap();
    }

    #[test]
    fn frame_patterns() {
        assert!(mentions_frame("In the First Frame, a dog"));
        assert!(mentions_frame("by the last frame it stops"));
        assert!(!mentions_frame("a picture frame on the wall"));
    }

    #[test]
    fn motion_waits_for_subject_and_scene() {
        let mut wf = flow(quiet());
        let err = wf.generate_precaption("v1/motion", &Actor::system(), None).unwrap_err();
        assert!(matches!(err, WorkflowError::OrderingViolation { .. }));
        assert_eq!(wf.item("v1/motion").unwrap().state, ItemState::PrimitivesReady);
        accept(&mut wf, "v1/subject");
        accept(&mut wf, "v1/scene");
        wf.generate_precaption("v1/motion", &Actor::system(), None).unwrap();
        assert_eq!(wf.item("v1/motion").unwrap().state, ItemState::PreCaptioned);
        wf.generate_precaption("v1/camera", &Actor::system(), None).unwrap();
    }

    #[test]
    fn frame_mention_retries_once() {
        let mut wf = flow(MockConfig { frame_mention_rate: 1.0, ..quiet() });
        let events = wf.generate_precaption("v1/subject", &Actor::system(), None).unwrap();
        let names: Vec<_> = events.iter().map(|e| e.kind.name()).collect();
        assert_eq!(names, ["retried_formatting", "pre_captioned"]);
        let item = wf.item("v1/subject").unwrap();
        assert!(!mentions_frame(&item.current.pre_caption));
        assert_eq!(item.iteration, 0);
    }

    #[test]
    fn no_edit_copies_and_replace_edits() {
        let mut wf = flow(quiet());
        wf.generate_precaption("v1/subject", &Actor::system(), None).unwrap();
        let calls = wf.client().calls();
        wf.submit_critique("v1/subject", NO_EDIT_CRITIQUE, &ann(), None).unwrap();
        assert_eq!(wf.client().calls(), calls);
        let item = wf.item("v1/subject").unwrap();
        assert_eq!(item.current.post_caption.as_deref(), Some(item.current.pre_caption.as_str()));
        assert_eq!(item.iteration, 1);

        let mut wf = flow(quiet());
        wf.generate_precaption("v1/subject", &Actor::system(), None).unwrap();
        let pre = wf.item("v1/subject").unwrap().current.pre_caption.clone();
        let target = if pre.contains("white shirt") { ("white", "black") } else { ("black", "white") };
        let critique = format!("- shirt [REPLACE \"{} shirt\" -> \"{} shirt\"]", target.0, target.1);
        wf.submit_critique("v1/subject", &critique, &ann(), None).unwrap();
        let post = wf.item("v1/subject").unwrap().current.post_caption.clone().unwrap();
        assert_eq!(post, pre.replace(&format!("{} shirt", target.0), &format!("{} shirt", target.1)));
    }

    #[test]
    fn cap_escalates_fourth_critique() {
        let mut wf = flow(quiet());
        let id = "v1/camera";
        wf.generate_precaption(id, &Actor::system(), None).unwrap();
        for _ in 0..3 {
            wf.submit_critique(id, "- wrong [APPEND \"More.\"]", &ann(), None).unwrap();
            wf.reopen(id, &ann(), None).unwrap();
        }
        let ev = wf.submit_critique(id, "- again [APPEND \"x\"]", &ann(), None).unwrap();
        assert_eq!(ev[0].kind.name(), "escalate_to_reviewer");
        let item = wf.item(id).unwrap();
        assert_eq!((item.state, item.iteration), (ItemState::InReview, 3));
        wf.review(id, ReviewDecision::Reject, Some("- fix [APPEND \"y\"]"), &rev(), None).unwrap();
        assert!(wf.item(id).unwrap().current.post_caption.as_deref().unwrap().ends_with('y'));
        wf.review(id, ReviewDecision::Approve, None, &rev(), None).unwrap();
        assert_eq!(wf.item(id).unwrap().state, ItemState::Accepted);
    }

    #[test]
    fn review_roles_and_appeals() {
        let mut wf = flow(quiet());
        let id = "v1/scene";
        wf.generate_precaption(id, &Actor::system(), None).unwrap();
        wf.submit_critique(id, NO_EDIT_CRITIQUE, &ann(), None).unwrap();
        wf.finalize(id, 4, Some(3.0), &ann(), None).unwrap();
        wf.submit(id, &ann(), None).unwrap();
        let self_review = Actor::new(Role::Reviewer, "ann");
        assert!(matches!(wf.review(id, ReviewDecision::Approve, None, &self_review, None), Err(WorkflowError::RoleViolation(_))));
        assert!(wf.review(id, ReviewDecision::Reject, None, &rev(), None).is_err());
        wf.review(id, ReviewDecision::Reject, Some("- tone [DELETE \"x\"]"), &rev(), None).unwrap();
        let item = wf.item(id).unwrap();
        assert_eq!(item.state, ItemState::Rejected);
        assert_eq!(item.current.final_critique(), Some("- tone [DELETE \"x\"]"));
        wf.appeal(id, "it was right", &ann(), None).unwrap();
        wf.resolve_appeal(id, true, None, &Actor::new(Role::Manager, "m"), None).unwrap();
        let item = wf.item(id).unwrap();
        assert_eq!(item.state, ItemState::Accepted);
        assert_eq!(item.marks.iter().map(|m| m.delta).sum::<i32>(), 0);
        assert_eq!(item.current.final_critique(), Some(NO_EDIT_CRITIQUE));
        assert!(matches!(wf.appeal(id, "again", &ann(), None), Err(WorkflowError::ImmutableItem(_))));
    }

    #[test]
    fn denied_appeal_is_final() {
        let mut wf = flow(quiet());
        let id = "v1/scene";
        wf.generate_precaption(id, &Actor::system(), None).unwrap();
        wf.submit_critique(id, NO_EDIT_CRITIQUE, &ann(), None).unwrap();
        wf.finalize(id, 4, None, &ann(), None).unwrap();
        wf.submit(id, &ann(), None).unwrap();
        wf.review(id, ReviewDecision::Reject, Some("- c [DELETE \"x\"]"), &rev(), None).unwrap();
        wf.appeal(id, "n", &ann(), None).unwrap();
        wf.resolve_appeal(id, false, Some("upheld"), &Actor::new(Role::Manager, "m"), None).unwrap();
        assert_eq!(wf.item(id).unwrap().state, ItemState::ManagerResolved);
        assert!(!wf.item(id).unwrap().counts_as_correct());
    }

    #[test]
    fn stale_version_conflicts() {
        let mut wf = flow(quiet());
        let v = wf.item("v1/subject").unwrap().version;
        wf.generate_precaption("v1/subject", &Actor::system(), Some(v)).unwrap();
        let err = wf.submit_critique("v1/subject", NO_EDIT_CRITIQUE, &ann(), Some(v)).unwrap_err();
        assert_eq!(err, WorkflowError::VersionConflict { expected: v, actual: v + 1 });
    }

    #[test]
    fn replay_matches_live_and_detects_gaps() {
        let mut wf = flow(quiet());
        accept(&mut wf, "v1/subject");
        let rebuilt = replay(WorkflowStore::default(), wf.log()).unwrap();
        assert_eq!(&rebuilt, wf.store());
        assert_eq!(replay(WorkflowStore::default(), &[]).unwrap(), WorkflowStore::default());

        let mut gap = wf.log().to_vec();
        let i = gap.iter().position(|e| e.item_id == "v1/subject" && e.parent_version == 3).unwrap();
        gap.remove(i);
        assert!(matches!(replay(WorkflowStore::default(), &gap), Err(WorkflowError::CorruptLog(_))));
        let mut dup = wf.log().to_vec();
        dup.insert(3, dup[2].clone());
        assert!(matches!(replay(WorkflowStore::default(), &dup), Err(WorkflowError::CorruptLog(_))));
    }

    #[test]
    fn events_roundtrip_json() {
        let wf = flow(quiet());
        for ev in wf.log() {
            let line = serde_json::to_string(ev).unwrap();
            let back: WorkflowEvent = serde_json::from_str(&line).unwrap();
            assert_eq!(&back, ev);
        }
    }
}
