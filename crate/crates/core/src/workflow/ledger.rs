//! Per-set pay settlement from review outcomes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Role, WorkflowError, WorkflowStore};
use crate::schema::AspectKind;

pub const SET_SIZE: usize = 50;
pub const ANNOTATOR_BASE_CENTS: i64 = 3000;
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjustment {
    pub reason: String,
    pub cents: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BonusLedgerEntry {
    pub user_id: String,
    pub set_id: String,
    pub role: Role,
    pub base_cents: i64,
    pub adjustments: Vec<Adjustment>,
    /// Lowest per-aspect accuracy of the annotator work this entry is keyed on.
    pub accuracy: f64,
    pub task_accuracy: BTreeMap<AspectKind, f64>,
}

impl BonusLedgerEntry {
    pub fn total_cents(&self) -> i64 {
        self.base_cents + self.adjustments.iter().map(|a| a.cents).sum::<i64>()
    }
}

/// Bonus when every task is at 90% or better, otherwise the largest
/// applicable deduction. Deductions do not stack.
pub fn annotator_adjustment(min_accuracy: f64) -> Option<Adjustment> {
    let adj = |reason: &str, cents| Some(Adjustment { reason: reason.into(), cents });
    if min_accuracy >= 0.9 - EPS {
        adj("all tasks at or above 90%", 500)
    } else if min_accuracy <= 0.3 + EPS {
        adj("a task at or below 30%", -1500)
    } else if min_accuracy <= 0.5 + EPS {
        adj("a task at or below 50%", -1000)
    } else if min_accuracy <= 0.7 + EPS {
        adj("a task at or below 70%", -500)
    } else {
        None
    }
}

/// Reviewer pay rises as the reviewed annotator's accuracy falls.
pub fn reviewer_base(annotator_min_accuracy: f64) -> i64 {
    let a = annotator_min_accuracy;
    if a <= 0.3 + EPS {
        3500
    } else if a <= 0.5 + EPS {
        3000
    } else if a <= 0.7 + EPS {
        2500
    } else if a >= 0.9 - EPS {
        1500
    } else {
        2000
    }
}

fn min_of(acc: &BTreeMap<AspectKind, f64>) -> f64 {
    acc.values().copied().fold(1.0, f64::min)
}

/// Settles one set: an entry per annotator, then one per reviewer.
pub fn settle_ledger(store: &WorkflowStore, set_id: &str) -> Result<Vec<BonusLedgerEntry>, WorkflowError> {
    let items: Vec<_> = store.items.values().filter(|i| i.set_id == set_id).collect();
    let settled = items.iter().filter(|i| i.state.is_terminal()).count();
    if items.len() != SET_SIZE || settled != items.len() {
        return Err(WorkflowError::SetIncomplete { set_id: set_id.into(), settled, total: items.len().max(SET_SIZE) });
    }

    let mut per_annotator: BTreeMap<&str, BTreeMap<AspectKind, (u32, u32)>> = BTreeMap::new();
    for i in &items {
        let who = i.annotator.as_deref().unwrap_or("");
        let slot = per_annotator.entry(who).or_default().entry(i.aspect).or_default();
        slot.1 += 1;
        if i.counts_as_correct() {
            slot.0 += 1;
        }
    }
    let mut annotator_acc: BTreeMap<&str, BTreeMap<AspectKind, f64>> = BTreeMap::new();
    let mut out = Vec::new();
    for (user, tasks) in &per_annotator {
        let acc: BTreeMap<AspectKind, f64> = tasks.iter().map(|(a, (ok, n))| (*a, f64::from(*ok) / f64::from(*n))).collect();
        let min = min_of(&acc);
        out.push(BonusLedgerEntry {
            user_id: user.to_string(),
            set_id: set_id.into(),
            role: Role::Annotator,
            base_cents: ANNOTATOR_BASE_CENTS,
            adjustments: annotator_adjustment(min).into_iter().collect(),
            accuracy: min,
            task_accuracy: acc.clone(),
        });
        annotator_acc.insert(user, acc);
    }

    let reviewers: BTreeSet<&str> = items.iter().filter_map(|i| i.reviewer.as_deref()).collect();
    for r in reviewers {
        let reviewed: BTreeSet<&str> =
            items.iter().filter(|i| i.reviewer.as_deref() == Some(r)).map(|i| i.annotator.as_deref().unwrap_or("")).collect();
        let mut acc: BTreeMap<AspectKind, f64> = BTreeMap::new();
        for a in reviewed {
            for (aspect, v) in &annotator_acc[a] {
                let e = acc.entry(*aspect).or_insert(1.0);
                *e = e.min(*v);
            }
        }
        let min = min_of(&acc);
        out.push(BonusLedgerEntry {
            user_id: r.to_string(),
            set_id: set_id.into(),
            role: Role::Reviewer,
            base_cents: reviewer_base(min),
            adjustments: Vec::new(),
            accuracy: min,
            task_accuracy: acc,
        });
    }
    Ok(out)
}
