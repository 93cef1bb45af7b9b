//! Persistent annotation service state: an append-only event log with
//! snapshots, label ingestion, statistics and a mock-driven simulator.

mod ingest;
mod persist;
mod simulate;
mod stats;

use std::io;

use crate::workflow::WorkflowError;

pub use ingest::{ingest_labels, IngestReport, RejectedLine, VIDEOS_PER_SET};
pub use persist::{compact, compact_events, load_log, Service, StoreSnapshot, LOG_FILE, SNAPSHOT_FILE, SNAPSHOT_SCHEMA_VERSION};
pub use simulate::{simulate, simulate_store, SimConfig, SimOutcome, TABLE5_MINUTES};
pub use stats::{accepted_triplets, compute_stats, AspectStats, StatsReport};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{file} line {line}: {source}")]
    Json { file: String, line: usize, source: serde_json::Error },
    #[error("snapshot schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
}
