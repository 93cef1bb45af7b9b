//! Event-sourced pre-caption, critique and review loop with appeals and
//! the accuracy bonus ledger.
//!
//! Every state change is a [`WorkflowEvent`]; [`WorkflowStore::apply`] is the
//! only transition function, so replaying a log rebuilds the live state.

mod engine;
mod ledger;
mod state;

use serde::{Deserialize, Serialize};

use crate::gateway::GatewayError;
use crate::prompts::PromptError;
use crate::schema::{AspectKind, PrimitiveLabelRecord};
use crate::triplet::AspectTriplet;

pub use engine::{mentions_frame, Workflow};
pub use ledger::{annotator_adjustment, reviewer_base, settle_ledger, Adjustment, BonusLedgerEntry, ANNOTATOR_BASE_CENTS, SET_SIZE};
pub use state::{replay, WorkflowStore};

pub const DEFAULT_ITERATION_CAP: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ItemState {
    Created,
    PrimitivesReady,
    PreCaptioned,
    AwaitingCritique,
    PostCaptioned,
    Submitted,
    InReview,
    Accepted,
    Rejected,
    Appealed,
    /// Appeal denied by a manager; final.
    ManagerResolved,
}

impl ItemState {
    pub fn is_terminal(self) -> bool {
        matches!(self, ItemState::Accepted | ItemState::ManagerResolved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Annotator,
    Reviewer,
    Manager,
    System,
}

impl Role {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "annotator" => Some(Role::Annotator),
            "reviewer" => Some(Role::Reviewer),
            "manager" => Some(Role::Manager),
            "system" => Some(Role::System),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Actor {
    pub role: Role,
    pub user_id: String,
}

impl Actor {
    pub fn new(role: Role, user_id: impl Into<String>) -> Self {
        Self { role, user_id: user_id.into() }
    }

    pub fn system() -> Self {
        Self::new(Role::System, "system")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewDecision {
    Approve,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Created { video_id: String, aspect: AspectKind, set_id: String, media_uri: String },
    PrimitivesAttached { record: Box<PrimitiveLabelRecord> },
    /// A pre-caption that mentioned specific frames and was regenerated.
    RetriedFormatting { rejected: String },
    PreCaptioned { text: String, prompt_digest: String },
    CritiqueSubmitted { critique: String, post_caption: String },
    EscalateToReviewer { critique: String },
    Reopened,
    Finalized { score: u8, minutes: Option<f64> },
    Submitted,
    Reviewed { decision: ReviewDecision, corrections: Option<String>, revised: Option<String> },
    Appealed { note: String },
    AppealResolved { accept: bool, note: Option<String> },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Created { .. } => "created",
            EventKind::PrimitivesAttached { .. } => "primitives_attached",
            EventKind::RetriedFormatting { .. } => "retried_formatting",
            EventKind::PreCaptioned { .. } => "pre_captioned",
            EventKind::CritiqueSubmitted { .. } => "critique_submitted",
            EventKind::EscalateToReviewer { .. } => "escalate_to_reviewer",
            EventKind::Reopened => "reopened",
            EventKind::Finalized { .. } => "finalized",
            EventKind::Submitted => "submitted",
            EventKind::Reviewed { .. } => "reviewed",
            EventKind::Appealed { .. } => "appealed",
            EventKind::AppealResolved { .. } => "appeal_resolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowEvent {
    pub event_id: u64,
    pub item_id: String,
    pub actor: Actor,
    #[serde(flatten)]
    pub kind: EventKind,
    /// Unix milliseconds; informational only.
    pub timestamp: u64,
    pub parent_version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritiqueEntry {
    pub text: String,
    pub author: Actor,
}

/// Signed accuracy mark against the item's annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyMark {
    pub reason: String,
    pub delta: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowItem {
    pub item_id: String,
    pub video_id: String,
    pub aspect: AspectKind,
    pub set_id: String,
    pub media_uri: String,
    pub state: ItemState,
    pub iteration: u32,
    pub version: u64,
    pub current: AspectTriplet,
    pub record: Option<PrimitiveLabelRecord>,
    pub critique_log: Vec<CritiqueEntry>,
    pub annotator: Option<String>,
    pub reviewer: Option<String>,
    pub escalated: bool,
    pub finalized: bool,
    pub reviews: u32,
    /// Outcome of the first review, once there is one.
    pub first_pass: Option<bool>,
    pub marks: Vec<AccuracyMark>,
    pub retried_formatting: u32,
    pub minutes: Option<f64>,
}

impl WorkflowItem {
    pub fn item_id_for(video_id: &str, aspect: AspectKind) -> String {
        format!("{video_id}/{}", aspect.as_str())
    }

    /// The caption the next critique applies to.
    pub fn working_caption(&self) -> &str {
        self.current.post_caption.as_deref().unwrap_or(&self.current.pre_caption)
    }

    /// Correct for ledger purposes unless a rejection stands.
    pub fn counts_as_correct(&self) -> bool {
        self.marks.iter().map(|m| m.delta).sum::<i32>() >= 0
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkflowError {
    #[error("item {0} not found")]
    NotFound(String),
    #[error("item {0} already exists")]
    Duplicate(String),
    #[error("{item}: {needs} must be accepted first")]
    OrderingViolation { item: String, needs: String },
    #[error("{op} not allowed in state {state:?}")]
    InvalidTransition { state: ItemState, op: &'static str },
    #[error("role violation: {0}")]
    RoleViolation(String),
    #[error("item {0} is final")]
    ImmutableItem(String),
    #[error("version conflict: expected {expected}, item is at {actual}")]
    VersionConflict { expected: u64, actual: u64 },
    #[error("corrupt event log: {0}")]
    CorruptLog(String),
    #[error("set {set_id} incomplete: {settled} of {total} items settled")]
    SetIncomplete { set_id: String, settled: usize, total: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}
