//! Post-training dataset builders: SFT rows in eight formats, preference
//! pairs with token segment labels, and the five-caption merge prompt.

mod preference;
mod segments;
mod sft;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::prompts::templates::fill;
use crate::prompts::PromptText;
use crate::schema::AspectKind;

pub use preference::{build_preferences, PreferenceBuild, PreferencePair, PreferenceTask};
pub use segments::{rlhfv_segments, Segment, SegmentLabel, SegmentTag};
pub use sft::{build_sft, clean_text, Exclusion, SftBuild, SftFormat, SftOptions, SftRecord, Source, YesNo};

pub const MERGE_TEMPLATE: &str = include_str!("../../resources/export/merge.txt");

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
}

/// Fills the merge template; the spatial caption is the base the others fold into.
pub fn merge_prompt(captions: &BTreeMap<AspectKind, String>) -> Result<PromptText, ExportError> {
    let mut block = Vec::with_capacity(5);
    let mut h = Sha256::new();
    for &aspect in AspectKind::ALL {
        let text = captions
            .get(&aspect)
            .ok_or_else(|| ExportError::Domain(format!("merge needs the {} caption", aspect.as_str())))?;
        let text = clean_text(text);
        h.update(aspect.as_str().as_bytes());
        h.update([0]);
        h.update(text.as_bytes());
        h.update([0]);
        block.push(format!("{}: {}", aspect.title(), text));
    }
    let text = fill(MERGE_TEMPLATE, &[("captions", &block.join("\n"))]);
    h.update(MERGE_TEMPLATE.as_bytes());
    Ok(PromptText { aspect: AspectKind::Spatial, text, inputs_digest: hex::encode(h.finalize()) })
}

/// Writes one JSON object per line. Field order follows the struct, so
/// re-exporting the same records gives the same bytes.
pub fn export_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<usize, ExportError> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| ExportError::Json { line: 0, source: e })?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(records.len())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, ExportError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| ExportError::Json { line: i + 1, source: e })?);
    }
    Ok(out)
}
