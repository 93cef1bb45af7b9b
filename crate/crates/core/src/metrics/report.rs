//! Per-aspect benchmark table for caption generation, reward modeling and
//! critique generation.

use std::collections::BTreeMap;

use serde::Serialize;

use super::bleu::bleu4;
use crate::schema::AspectKind;
use crate::triplet::TripletRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchTask {
    Caption,
    Reward,
    Critique,
}

impl BenchTask {
    pub const ALL: [BenchTask; 3] = [BenchTask::Caption, BenchTask::Reward, BenchTask::Critique];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchTask::Caption => "caption",
            BenchTask::Reward => "reward",
            BenchTask::Critique => "critique",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// Generated caption, scored with BLEU-4 against the post-caption.
    Caption(String),
    /// Reward scores for the pre- and post-caption of the same item.
    Reward { pre: f64, post: f64 },
    /// Generated critique, scored with BLEU-4 against the human critique.
    Critique(String),
    /// Externally computed per-item value in [0, 1].
    Value(f64),
}

pub type PredictionKey = (String, AspectKind, BenchTask);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRow {
    pub task: BenchTask,
    /// Indexed like `AspectKind::ALL`; `None` when the aspect has no scored items.
    pub per_aspect: [Option<f64>; 5],
    pub average: Option<f64>,
    pub scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub rows: Vec<TaskRow>,
    pub missing: Vec<(String, AspectKind, BenchTask)>,
}

impl BenchmarkReport {
    /// Tab-separated table with one row per task.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("task");
        for a in AspectKind::ALL {
            out.push('\t');
            out.push_str(a.as_str());
        }
        out.push_str("\taverage\n");
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.4}", v));
        for row in &self.rows {
            out.push_str(row.task.as_str());
            for v in row.per_aspect {
                out.push('\t');
                out.push_str(&cell(v));
            }
            out.push('\t');
            out.push_str(&cell(row.average));
            out.push('\n');
        }
        out
    }
}

fn item_value(record: &TripletRecord, prediction: &Prediction) -> Option<f64> {
    let t = &record.triplet;
    match prediction {
        Prediction::Caption(c) => t.post_caption.as_deref().map(|r| bleu4(c, r)),
        Prediction::Reward { pre, post } => Some(if post > pre { 1.0 } else { 0.0 }),
        Prediction::Critique(c) => t.final_critique().map(|r| bleu4(c, r)),
        Prediction::Value(v) => Some(*v),
    }
}

pub fn benchmark_report(records: &[TripletRecord], predictions: &BTreeMap<PredictionKey, Prediction>) -> BenchmarkReport {
    let mut missing = Vec::new();
    let mut rows = Vec::new();
    for task in BenchTask::ALL {
        let mut sums = [(0.0f64, 0usize); 5];
        for rec in records {
            let key = (rec.video_id.clone(), rec.aspect, task);
            match predictions.get(&key).and_then(|p| item_value(rec, p)) {
                Some(v) => {
                    let slot = &mut sums[rec.aspect as usize];
                    slot.0 += v;
                    slot.1 += 1;
                }
                None => missing.push(key),
            }
        }
        let per_aspect = sums.map(|(s, n)| (n > 0).then(|| s / n as f64));
        let present: Vec<f64> = per_aspect.iter().flatten().copied().collect();
        let average = (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
        rows.push(TaskRow { task, per_aspect, average, scored: sums.iter().map(|s| s.1).sum() });
    }
    BenchmarkReport { rows, missing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triplet::AspectTriplet;

    fn rec(video: &str, aspect: AspectKind) -> TripletRecord {
        TripletRecord {
            video_id: video.into(),
            aspect,
            media_uri: format!("mem://{video}"),
            triplet: AspectTriplet {
                pre_caption: "a man walks".into(),
                critiques: vec!["say he runs".into()],
                post_caption: Some("a man runs".into()),
                human_score: Some(3),
            },
        }
    }

    #[test]
    fn reward_strictness() {
        let records = vec![rec("a", AspectKind::Subject), rec("b", AspectKind::Subject)];
        let mut preds = BTreeMap::new();
        for r in &records {
            preds.insert((r.video_id.clone(), r.aspect, BenchTask::Reward), Prediction::Reward { pre: 0.4, post: 0.4 });
        }
        let rep = benchmark_report(&records, &preds);
        assert_eq!(rep.rows[1].per_aspect[0], Some(0.0));
        assert_eq!(rep.missing.len(), 4);
    }
}
