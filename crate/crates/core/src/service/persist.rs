//! Event log and snapshot files.

use std::collections::{BTreeSet, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ingest::{ingest_labels, IngestReport};
use super::stats::{compute_stats, StatsReport};
use super::ServiceError;
use crate::gateway::ModelClient;
use crate::workflow::{replay, settle_ledger, BonusLedgerEntry, Workflow, WorkflowError, WorkflowEvent, WorkflowStore, DEFAULT_ITERATION_CAP};

pub const LOG_FILE: &str = "events.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSnapshot {
    pub schema_version: u32,
    pub last_event_id: u64,
    pub store: WorkflowStore,
    /// Settlements of every complete set at snapshot time.
    pub ledger: Vec<BonusLedgerEntry>,
}

impl StoreSnapshot {
    pub fn of(store: &WorkflowStore) -> Self {
        Self { schema_version: SNAPSHOT_SCHEMA_VERSION, last_event_id: store.last_event_id, store: store.clone(), ledger: settle_all(store) }
    }
}

fn settle_all(store: &WorkflowStore) -> Vec<BonusLedgerEntry> {
    let sets: BTreeSet<&str> = store.items.values().map(|i| i.set_id.as_str()).collect();
    sets.into_iter().filter_map(|s| settle_ledger(store, s).ok()).flatten().collect()
}

/// Reads the log. A final line without a newline is an interrupted append
/// and is dropped; any other unparsable line is an error.
pub fn load_log(path: &Path) -> Result<Vec<WorkflowEvent>, ServiceError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut out = Vec::new();
    for (i, line) in complete.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(line).map_err(|e| ServiceError::Json { file: path.display().to_string(), line: i + 1, source: e })?;
        out.push(ev);
    }
    Ok(out)
}

fn load_snapshot(path: &Path) -> Result<Option<StoreSnapshot>, ServiceError> {
    if !path.exists() {
        return Ok(None);
    }
    let reader = BufReader::new(File::open(path)?);
    let snap: StoreSnapshot =
        serde_json::from_reader(reader).map_err(|e| ServiceError::Json { file: path.display().to_string(), line: 0, source: e })?;
    if snap.schema_version != SNAPSHOT_SCHEMA_VERSION {
        return Err(ServiceError::SchemaVersion { found: snap.schema_version, expected: SNAPSHOT_SCHEMA_VERSION });
    }
    Ok(Some(snap))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn check_unique(events: &[WorkflowEvent]) -> Result<(), WorkflowError> {
    let mut seen = HashSet::new();
    for ev in events {
        if !seen.insert(ev.event_id) {
            return Err(WorkflowError::CorruptLog(format!("duplicate event id {}", ev.event_id)));
        }
    }
    Ok(())
}

/// Folds `events` into a snapshot over `base`. The remaining log is empty.
pub fn compact_events(base: &WorkflowStore, events: &[WorkflowEvent]) -> Result<(StoreSnapshot, Vec<WorkflowEvent>), WorkflowError> {
    check_unique(events)?;
    let store = replay(base.clone(), events)?;
    Ok((StoreSnapshot::of(&store), Vec::new()))
}

/// Compacts the files in `dir`. Nothing is written if the log does not replay.
pub fn compact(dir: &Path) -> Result<StoreSnapshot, ServiceError> {
    let base = load_snapshot(&dir.join(SNAPSHOT_FILE))?.map(|s| s.store).unwrap_or_default();
    let events = load_log(&dir.join(LOG_FILE))?;
    let (snap, _) = compact_events(&base, &events)?;
    let bytes = serde_json::to_vec(&snap).expect("snapshot serializes");
    write_atomic(&dir.join(SNAPSHOT_FILE), &bytes)?;
    write_atomic(&dir.join(LOG_FILE), b"")?;
    Ok(snap)
}

/// A workflow whose events are appended to `dir/events.jsonl` as they commit.
pub struct Service<C> {
    dir: Option<PathBuf>,
    workflow: Workflow<C>,
}

impl<C: ModelClient> Service<C> {
    pub fn in_memory(client: C) -> Self {
        Self { dir: None, workflow: Workflow::new(client) }
    }

    pub fn open(dir: &Path, client: C) -> Result<Self, ServiceError> {
        fs::create_dir_all(dir)?;
        let snap = load_snapshot(&dir.join(SNAPSHOT_FILE))?;
        let base = snap.map(|s| s.store).unwrap_or_else(|| WorkflowStore::new(DEFAULT_ITERATION_CAP));
        let events = load_log(&dir.join(LOG_FILE))?;
        check_unique(&events)?;
        let store = replay(base, &events)?;
        Ok(Self { dir: Some(dir.to_path_buf()), workflow: Workflow::with_store(client, store, events) })
    }

    pub fn workflow(&self) -> &Workflow<C> {
        &self.workflow
    }

    pub fn store(&self) -> &WorkflowStore {
        self.workflow.store()
    }

    /// Runs one workflow operation and persists the events it produced.
    pub fn mutate<F>(&mut self, op: F) -> Result<Vec<WorkflowEvent>, ServiceError>
    where
        F: FnOnce(&mut Workflow<C>) -> Result<Vec<WorkflowEvent>, WorkflowError>,
    {
        let events = op(&mut self.workflow)?;
        self.persist(&events)?;
        Ok(events)
    }

    /// Loads label lines and persists the resulting events.
    pub fn ingest(&mut self, text: &str) -> Result<IngestReport, ServiceError> {
        let (report, events) = ingest_labels(&mut self.workflow, text);
        self.persist(&events)?;
        Ok(report)
    }

    fn persist(&self, events: &[WorkflowEvent]) -> Result<(), ServiceError> {
        if events.is_empty() {
            return Ok(());
        }
        if let Some(dir) = &self.dir {
            let mut f = OpenOptions::new().create(true).append(true).open(dir.join(LOG_FILE))?;
            let mut buf = String::new();
            for ev in events {
                buf.push_str(&serde_json::to_string(ev).expect("event serializes"));
                buf.push('\n');
            }
            f.write_all(buf.as_bytes())?;
            f.sync_data()?;
        }
        Ok(())
    }

    pub fn stats(&self) -> StatsReport {
        compute_stats(self.store())
    }

    pub fn snapshot(&self) -> StoreSnapshot {
        StoreSnapshot::of(self.store())
    }

    pub fn ledger_for(&self, user_id: &str) -> Vec<BonusLedgerEntry> {
        settle_all(self.store()).into_iter().filter(|e| e.user_id == user_id).collect()
    }

    pub fn compact(&mut self) -> Result<Option<StoreSnapshot>, ServiceError> {
        match &self.dir {
            Some(dir) => compact(dir).map(Some),
            None => Ok(None),
        }
    }
}
