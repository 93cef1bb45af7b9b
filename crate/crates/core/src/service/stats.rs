//! Per-aspect annotation statistics over accepted items.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::schema::AspectKind;
use crate::triplet::TripletRecord;
use crate::workflow::{ItemState, Role, WorkflowStore};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AspectStats {
    pub accepted: usize,
    pub mean_iterations: f64,
    pub max_iterations: u32,
    pub mean_pre_score: f64,
    pub mean_post_words: f64,
    pub mean_critique_words: f64,
    /// Self-reported by annotators; `None` when nobody reported.
    pub mean_minutes: Option<f64>,
    /// Accepted on the first review.
    pub first_pass_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub items: usize,
    pub accepted: usize,
    pub per_aspect: BTreeMap<AspectKind, AspectStats>,
    pub first_pass_rate: f64,
    pub within_cap_rate: f64,
}

fn words(text: &str) -> usize {
    text.split_whitespace().count()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Accepted items as dataset triplets, in item-id order.
pub fn accepted_triplets(store: &WorkflowStore) -> Vec<TripletRecord> {
    store
        .items
        .values()
        .filter(|i| i.state == ItemState::Accepted)
        .map(|i| TripletRecord { video_id: i.video_id.clone(), aspect: i.aspect, media_uri: i.media_uri.clone(), triplet: i.current.clone() })
        .collect()
}

pub fn compute_stats(store: &WorkflowStore) -> StatsReport {
    let accepted: Vec<_> = store.items.values().filter(|i| i.state == ItemState::Accepted).collect();
    let mut per_aspect = BTreeMap::new();
    for &aspect in AspectKind::ALL {
        let items: Vec<_> = accepted.iter().filter(|i| i.aspect == aspect).collect();
        if items.is_empty() {
            continue;
        }
        let iters: Vec<f64> = items.iter().map(|i| f64::from(i.iteration)).collect();
        let pre: Vec<f64> = items.iter().filter_map(|i| i.current.human_score).map(f64::from).collect();
        let post: Vec<f64> = items.iter().map(|i| words(i.working_caption()) as f64).collect();
        let crit: Vec<f64> = items
            .iter()
            .map(|i| i.critique_log.iter().filter(|c| c.author.role == Role::Annotator).map(|c| words(&c.text)).sum::<usize>() as f64)
            .collect();
        let minutes: Vec<f64> = items.iter().filter_map(|i| i.minutes).collect();
        let first = items.iter().filter(|i| i.first_pass == Some(true)).count();
        per_aspect.insert(
            aspect,
            AspectStats {
                accepted: items.len(),
                mean_iterations: mean(&iters),
                max_iterations: items.iter().map(|i| i.iteration).max().unwrap_or(0),
                mean_pre_score: mean(&pre),
                mean_post_words: mean(&post),
                mean_critique_words: mean(&crit),
                mean_minutes: (!minutes.is_empty()).then(|| mean(&minutes)),
                first_pass_rate: first as f64 / items.len() as f64,
            },
        );
    }
    let n = accepted.len().max(1) as f64;
    StatsReport {
        items: store.items.len(),
        accepted: accepted.len(),
        per_aspect,
        first_pass_rate: accepted.iter().filter(|i| i.first_pass == Some(true)).count() as f64 / n,
        within_cap_rate: accepted.iter().filter(|i| i.iteration <= store.iteration_cap).count() as f64 / n,
    }
}

impl StatsReport {
    pub fn to_table(&self) -> String {
        let mut out = String::from("aspect\taccepted\titerations\tmax_iter\tpre_score\tpost_words\tcritique_words\tminutes\tfirst_pass\n");
        for (aspect, s) in &self.per_aspect {
            let minutes = s.mean_minutes.map_or("-".to_string(), |m| format!("{m:.1}"));
            let _ = writeln!(
                out,
                "{}\t{}\t{:.2}\t{}\t{:.2}\t{:.1}\t{:.1}\t{}\t{:.3}",
                aspect.as_str(),
                s.accepted,
                s.mean_iterations,
                s.max_iterations,
                s.mean_pre_score,
                s.mean_post_words,
                s.mean_critique_words,
                minutes,
                s.first_pass_rate
            );
        }
        let _ = writeln!(
            out,
            "all\t{}/{}\t\t\t\t\t\t\t{:.3}\nwithin_cap\t{:.3}",
            self.accepted, self.items, self.first_pass_rate, self.within_cap_rate
        );
        out
    }
}
