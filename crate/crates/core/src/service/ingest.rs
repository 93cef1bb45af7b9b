//! Loading label records into the workflow.

use serde::Serialize;

use crate::gateway::ModelClient;
use crate::schema::{parse_record, validate_record, AspectKind};
use crate::workflow::{ItemState, Workflow, WorkflowItem};

pub const VIDEOS_PER_SET: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub ingested: usize,
    pub updated: usize,
    pub duplicates: usize,
    pub rejected: Vec<RejectedLine>,
}

/// Ingests label lines. New videos are grouped into sets of ten in arrival
/// order; a repeated (video_id, revision) is counted and skipped; a newer
/// revision replaces the labels only while no aspect has been pre-captioned.
pub fn ingest_labels<C: ModelClient>(wf: &mut Workflow<C>, text: &str) -> (IngestReport, Vec<crate::workflow::WorkflowEvent>) {
    let mut report = IngestReport::default();
    let mut events = Vec::new();
    let mut videos = wf.store().items.values().filter(|i| i.aspect == AspectKind::Subject).count();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = match parse_record(line) {
            Ok(r) => r,
            Err(e) => {
                report.rejected.push(RejectedLine { line: line_no, reason: e.to_string() });
                continue;
            }
        };
        let validation = validate_record(&record);
        if !validation.passed() {
            report.rejected.push(RejectedLine { line: line_no, reason: validation.codes().join(",") });
            continue;
        }
        let existing = wf.store().items.get(&WorkflowItem::item_id_for(&record.video_id, AspectKind::Subject)).cloned();
        let set_id = match &existing {
            Some(item) => {
                let revision = item.record.as_ref().map_or(0, |r| r.revision);
                if revision == record.revision {
                    report.duplicates += 1;
                    continue;
                }
                if record.revision < revision {
                    report.rejected.push(RejectedLine { line: line_no, reason: format!("revision {} older than {revision}", record.revision) });
                    continue;
                }
                let started = AspectKind::ALL.iter().any(|a| {
                    wf.store().items.get(&WorkflowItem::item_id_for(&record.video_id, *a)).is_some_and(|i| i.state != ItemState::PrimitivesReady)
                });
                if started {
                    report.rejected.push(RejectedLine { line: line_no, reason: "captioning already started".into() });
                    continue;
                }
                item.set_id.clone()
            }
            None => format!("set-{:04}", videos / VIDEOS_PER_SET),
        };
        match wf.ingest_record(&record, &set_id) {
            Ok(evs) => {
                events.extend(evs);
                if existing.is_some() {
                    report.updated += 1;
                } else {
                    report.ingested += 1;
                    videos += 1;
                }
            }
            Err(e) => report.rejected.push(RejectedLine { line: line_no, reason: e.to_string() }),
        }
    }
    (report, events)
}
