//! Chosen/rejected pairs for preference tuning.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::segments::{rlhfv_segments, SegmentLabel};
use super::sft::{adversarial_pool, clean_text, Source, YesNo};
use crate::critique::{DegradationKind, DegradedCritique};
use crate::instructions::{caption_prompt, task_instruction, CAPTION_REVISION, CAPTION_REWARD, CRITIQUE_GEN};
use crate::seed::seeded_rng;
use crate::triplet::{TripletRecord, NO_EDIT_CRITIQUE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceTask {
    Caption,
    Critique,
    Reward,
    Revision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub task: PreferenceTask,
    pub prompt: String,
    pub media_uri: String,
    pub chosen: String,
    pub rejected: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<SegmentLabel>,
    pub source: Source,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreferenceBuild {
    pub pairs: Vec<PreferencePair>,
    /// Critique pairs dropped because no degraded critique was available.
    pub skipped_critique: usize,
    pub skipped_incomplete: usize,
}

pub fn build_preferences(triplets: &[TripletRecord], degraded: &[DegradedCritique], seed: u64) -> PreferenceBuild {
    let mut out = PreferenceBuild::default();
    let mut order: Vec<&TripletRecord> = triplets.iter().collect();
    order.sort_by(|a, b| (&a.video_id, a.aspect).cmp(&(&b.video_id, b.aspect)));

    for t in order {
        let (Some(post), Some(score)) = (t.triplet.post_caption.as_deref(), t.triplet.human_score) else {
            out.skipped_incomplete += 1;
            continue;
        };
        let source = Source { video_id: t.video_id.clone(), aspect: t.aspect };
        let task = task_instruction(t.aspect);
        let pre = clean_text(&t.triplet.pre_caption);
        let post = clean_text(post);
        let needs = score < 5;
        let critique = match t.triplet.final_critique() {
            Some(c) if needs => clean_text(c),
            _ => NO_EDIT_CRITIQUE.to_string(),
        };
        let mut push = |task, prompt: String, chosen: String, rejected: String, segments: bool| {
            if chosen == rejected {
                return;
            }
            let segments = segments.then(|| rlhfv_segments(&rejected, &chosen));
            out.pairs.push(PreferencePair { task, prompt, media_uri: t.media_uri.clone(), chosen, rejected, segments, source: source.clone() });
        };

        if needs {
            push(PreferenceTask::Caption, task.to_string(), post.clone(), pre.clone(), true);
        }

        let pool = adversarial_pool(degraded, &t.video_id, t.aspect, &DegradationKind::ALL);
        let mut rng = seeded_rng(seed, &["preference_critique", &t.video_id, t.aspect.as_str()]);
        match pool.choose(&mut rng) {
            Some(d) => push(PreferenceTask::Critique, caption_prompt(task, &pre, None, CRITIQUE_GEN), critique, clean_text(&d.degraded), false),
            None => out.skipped_critique += 1,
        }

        push(PreferenceTask::Reward, caption_prompt(task, &post, None, CAPTION_REWARD), YesNo::Yes.as_str().into(), YesNo::No.as_str().into(), false);
        if needs {
            push(PreferenceTask::Reward, caption_prompt(task, &pre, None, CAPTION_REWARD), YesNo::No.as_str().into(), YesNo::Yes.as_str().into(), false);
            push(PreferenceTask::Revision, caption_prompt(task, &pre, None, CAPTION_REVISION), post.clone(), pre.clone(), true);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critique::DegradeMode;
    use crate::schema::AspectKind;
    use crate::triplet::AspectTriplet;

    fn t(score: u8) -> TripletRecord {
        TripletRecord {
            video_id: "v".into(),
            aspect: AspectKind::Scene,
            media_uri: "mem://v".into(),
            triplet: AspectTriplet {
                pre_caption: "A beach at noon.".into(),
                critiques: vec!["- time [REPLACE \"noon\" -> \"dusk\"]".into()],
                post_caption: Some(if score == 5 { "A beach at noon." } else { "A beach at dusk." }.into()),
                human_score: Some(score),
            },
        }
    }

    fn d(kind: DegradationKind, text: &str) -> DegradedCritique {
        DegradedCritique {
            video_id: "v".into(),
            aspect: AspectKind::Scene,
            kind,
            original: "orig".into(),
            degraded: text.into(),
            mode: DegradeMode::Deterministic,
            seed: 0,
        }
    }

    #[test]
    fn perfect_pre_gives_no_caption_pair() {
        let b = build_preferences(&[t(5)], &[], 0);
        assert!(b.pairs.iter().all(|p| p.task != PreferenceTask::Caption && p.task != PreferenceTask::Revision));
        assert_eq!(b.skipped_critique, 1);
    }

    #[test]
    fn seeded_critique_sample_is_stable() {
        let pool = [d(DegradationKind::Insertion, "ins"), d(DegradationKind::Deletion, "del")];
        let pick = |seed| {
            build_preferences(&[t(3)], &pool, seed).pairs.into_iter().find(|p| p.task == PreferenceTask::Critique).unwrap().rejected
        };
        for seed in 0..20 {
            assert_eq!(pick(seed), pick(seed));
        }
        let seen: std::collections::BTreeSet<String> = (0..40).map(pick).collect();
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn reward_pairs_flip() {
        let b = build_preferences(&[t(3)], &[], 0);
        let rewards: Vec<_> = b.pairs.iter().filter(|p| p.task == PreferenceTask::Reward).collect();
        assert_eq!(rewards.len(), 2);
        assert_eq!((rewards[0].chosen.as_str(), rewards[0].rejected.as_str()), ("Yes", "No"));
        assert_eq!((rewards[1].chosen.as_str(), rewards[1].rejected.as_str()), ("No", "Yes"));
        assert!(b.pairs.iter().all(|p| p.chosen != p.rejected));
    }
}
