//! The eight SFT instruction formats with Yes/No balancing.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::critique::{DegradationKind, DegradedCritique};
use crate::instructions::{
    caption_prompt, task_instruction, CAPTION_REVISION, CAPTION_REVISION_WITH_CRITIQUE, CAPTION_REWARD, CAPTION_SCORING,
    CRITIQUE_BASED_REVISION, CRITIQUE_GEN, CRITIQUE_REWARD,
};
use crate::schema::AspectKind;
use crate::seed::seeded_rng;
use crate::triplet::{TripletRecord, NO_EDIT_CRITIQUE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SftFormat {
    CaptionGen,
    CritiqueGen,
    CaptionReward,
    CritiqueReward,
    CaptionRevision,
    CaptionRevisionWithCritique,
    CritiqueBasedRevision,
    CaptionScoring,
}

impl SftFormat {
    pub const ALL: [SftFormat; 8] = [
        SftFormat::CaptionGen,
        SftFormat::CritiqueGen,
        SftFormat::CaptionReward,
        SftFormat::CritiqueReward,
        SftFormat::CaptionRevision,
        SftFormat::CaptionRevisionWithCritique,
        SftFormat::CritiqueBasedRevision,
        SftFormat::CaptionScoring,
    ];

    pub fn is_reward(self) -> bool {
        matches!(self, SftFormat::CaptionReward | SftFormat::CritiqueReward)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum YesNo {
    Yes,
    No,
}

impl YesNo {
    pub fn flip(self) -> Self {
        match self {
            YesNo::Yes => YesNo::No,
            YesNo::No => YesNo::Yes,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            YesNo::Yes => "Yes",
            YesNo::No => "No",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Source {
    pub video_id: String,
    pub aspect: AspectKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub format_tag: SftFormat,
    pub instruction: String,
    pub media_uri: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<YesNo>,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub source: Source,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct SftOptions {
    pub seed: u64,
    /// Hallucinated captions scored 1 for the Likert format, keyed by (video_id, aspect).
    pub adversarial_captions: BTreeMap<(String, AspectKind), Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SftBuild {
    pub records: Vec<SftRecord>,
    pub excluded: Vec<Exclusion>,
    /// Triplets whose critique_reward rows fell back to the two-row form for lack of an adversarial critique.
    pub critique_reward_fallbacks: usize,
}

impl SftBuild {
    pub fn count(&self, format: SftFormat, label: Option<YesNo>) -> usize {
        self.records.iter().filter(|r| r.format_tag == format && r.label == label).count()
    }
}

/// Replaces line breaks with spaces and trims.
pub fn clean_text(text: &str) -> String {
    let joined: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    joined.join(" ")
}

/// Insertion and replacement corruptions usable as wrong critiques.
pub(crate) fn adversarial_pool<'a>(degraded: &'a [DegradedCritique], video_id: &str, aspect: AspectKind, kinds: &[DegradationKind]) -> Vec<&'a DegradedCritique> {
    let mut pool: Vec<&DegradedCritique> = degraded
        .iter()
        .filter(|d| d.video_id == video_id && d.aspect == aspect && kinds.contains(&d.kind) && d.degraded.trim() != d.original.trim())
        .collect();
    pool.sort_by(|a, b| (a.kind, &a.degraded, a.seed).cmp(&(b.kind, &b.degraded, b.seed)));
    pool
}

pub fn build_sft(triplets: &[TripletRecord], degraded: &[DegradedCritique], options: &SftOptions) -> SftBuild {
    let mut build = SftBuild::default();
    let mut order: Vec<&TripletRecord> = triplets.iter().collect();
    order.sort_by(|a, b| (&a.video_id, a.aspect).cmp(&(&b.video_id, b.aspect)));

    for t in order {
        let source = Source { video_id: t.video_id.clone(), aspect: t.aspect };
        let (Some(post), Some(score)) = (t.triplet.post_caption.as_deref(), t.triplet.human_score) else {
            build.excluded.push(Exclusion { source, reason: "missing post-caption or human score".into() });
            continue;
        };
        if !(1..=5).contains(&score) {
            build.excluded.push(Exclusion { source, reason: format!("human score {score} outside 1..5") });
            continue;
        }
        let task = task_instruction(t.aspect);
        let pre = clean_text(&t.triplet.pre_caption);
        let post = clean_text(post);
        let needs = score < 5;
        let critique = match (needs, t.triplet.final_critique()) {
            (true, Some(c)) => clean_text(c),
            (true, None) => {
                build.excluded.push(Exclusion { source, reason: "pre-caption below 5 without a critique".into() });
                continue;
            }
            (false, _) => NO_EDIT_CRITIQUE.to_string(),
        };

        let mut rows: Vec<SftRecord> = Vec::new();
        let mut row = |format, instruction: String, target: String, label| {
            rows.push(SftRecord { format_tag: format, instruction, media_uri: t.media_uri.clone(), target, label, source: source.clone() })
        };

        row(SftFormat::CaptionGen, task.to_string(), post.clone(), None);
        row(SftFormat::CritiqueGen, caption_prompt(task, &pre, None, CRITIQUE_GEN), critique.clone(), None);

        if needs {
            row(SftFormat::CaptionReward, caption_prompt(task, &post, None, CAPTION_REWARD), YesNo::Yes.as_str().into(), Some(YesNo::Yes));
            row(SftFormat::CaptionReward, caption_prompt(task, &pre, None, CAPTION_REWARD), YesNo::No.as_str().into(), Some(YesNo::No));

            let cr = |caption: &str, crit: &str| caption_prompt(task, caption, Some(crit), CRITIQUE_REWARD);
            let pool = adversarial_pool(degraded, &t.video_id, t.aspect, &[DegradationKind::Insertion, DegradationKind::Replacement]);
            let mut rng = seeded_rng(options.seed, &["sft_critique_reward", &t.video_id, t.aspect.as_str()]);
            let adversarial = pool.choose(&mut rng).map(|d| clean_text(&d.degraded));
            row(SftFormat::CritiqueReward, cr(&pre, &critique), "Yes".into(), Some(YesNo::Yes));
            row(SftFormat::CritiqueReward, cr(&pre, NO_EDIT_CRITIQUE), "No".into(), Some(YesNo::No));
            if let Some(adv) = adversarial {
                row(SftFormat::CritiqueReward, cr(&post, NO_EDIT_CRITIQUE), "Yes".into(), Some(YesNo::Yes));
                row(SftFormat::CritiqueReward, cr(&post, &adv), "No".into(), Some(YesNo::No));
            } else {
                build.critique_reward_fallbacks += 1;
            }
        }

        row(SftFormat::CaptionRevision, caption_prompt(task, &pre, None, CAPTION_REVISION), post.clone(), None);
        row(
            SftFormat::CaptionRevisionWithCritique,
            caption_prompt(task, &pre, Some(&critique), CAPTION_REVISION_WITH_CRITIQUE),
            post.clone(),
            None,
        );
        row(
            SftFormat::CritiqueBasedRevision,
            caption_prompt(task, &pre, None, CRITIQUE_BASED_REVISION),
            format!("Critique: {critique}\nImproved Caption: {post}"),
            None,
        );

        row(SftFormat::CaptionScoring, caption_prompt(task, &pre, None, CAPTION_SCORING), score.to_string(), None);
        if needs {
            row(SftFormat::CaptionScoring, caption_prompt(task, &post, None, CAPTION_SCORING), "5".into(), None);
        }
        if let Some(negs) = options.adversarial_captions.get(&(t.video_id.clone(), t.aspect)) {
            for n in negs {
                row(SftFormat::CaptionScoring, caption_prompt(task, &clean_text(n), None, CAPTION_SCORING), "1".into(), None);
            }
        }

        rows.sort_by_key(|r| r.format_tag);
        build.records.extend(rows);
    }
    build
}
