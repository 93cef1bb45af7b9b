use super::templates::{fill, MOTION_BASE, MOTION_HAS_SUBJECT_DESC};
use super::{PolicyContext, PromptError, PromptText};
use crate::schema::{AspectKind, ChangeSubtype, FramingSubject};

const SCENERY: &str = "The video is a scenery shot. You do not need to describe the subject motion. Just note that briefly in one to three sentences.";
const NO_CLEAR_FOCUS: &str = "Please note that this video contains **multiple subjects without a clear main focus**. Briefly describe the salient motions and dynamics of the primary subjects while providing a concise overview of secondary movements, or describe all subjects' collective motion if that is more appropriate.";
const HUMAN: &str = "Please note that the video features salient **human** subjects, so the description should focus on their motion and dynamics.";
const NON_HUMAN: &str = "Please note that the video features salient **non-human** subjects, so the description should focus on their motion and dynamics.";
const REVEALING: &str = "Please note that the video is a **revealing shot of the subject**, so the description should reflect this by explaining how the subject is revealed through either subject movement or camera movement.";
const DISAPPEARING: &str = "Please note that the video features the main subjects **disappearing from the frame**, so the description should reflect this by explaining how they exit, whether through subject movement or camera movement.";
const SWITCHING: &str = "Please note that the video features the main subjects **switching from one to another**, so the description should first describe the first subject's motion and dynamics, followed by the second's.";
const DYNAMIC: &str = "Please note that the **main subject's framing is not stable** throughout the video, so the description should reflect how their motion and dynamics contribute to this instability.";
const ATYPICAL: &str = "Please note that the main subjects in this video exhibit **atypical motion, posture, or anatomy**, so the description should reflect this.";
const ONE_FOCUS: &str = "Please note that the video features **multiple subjects with a clear main focus**, so the description should focus on the motion and dynamics of the main subject while providing a concise overview of secondary subjects' movements.";
const DIFFERENT: &str = "Please note that the video features **multiple different subjects in focus**, so the description should clearly distinguish their types, movement patterns, and interactions.";

pub fn build_motion_prompt(ctx: &PolicyContext) -> Result<PromptText, PromptError> {
    let c = &ctx.record.composition;
    if c.framing_subject == FramingSubject::False {
        return Ok(ctx.finish(AspectKind::Motion, SCENERY.to_string()));
    }
    let subject = ctx.caption(AspectKind::Motion, AspectKind::Subject)?;

    let mut p = String::from(MOTION_BASE);
    if c.framing_subject == FramingSubject::Undetermined && c.many_subject_no_clear_focus {
        p.push_str(NO_CLEAR_FOCUS);
        return Ok(ctx.finish(AspectKind::Motion, p));
    }

    if c.human_shot {
        p.push_str(HUMAN);
    } else if c.non_human_shot {
        p.push_str(NON_HUMAN);
    } else if c.change_of_subject_shot {
        match c.change_subtype {
            ChangeSubtype::Revealing => p.push_str(REVEALING),
            ChangeSubtype::Disappearing => p.push_str(DISAPPEARING),
            ChangeSubtype::Switching => p.push_str(SWITCHING),
            ChangeSubtype::None => {}
        }
    } else if c.clear_subject_dynamic_size {
        p.push_str(DYNAMIC);
    } else if c.clear_subject_atypical_size {
        p.push_str(ATYPICAL);
    } else if c.many_subject_one_focus {
        p.push_str(ONE_FOCUS);
    } else if c.different_subjects_in_focus {
        p.push_str(DIFFERENT);
    }
    p.push_str(&fill(MOTION_HAS_SUBJECT_DESC, &[("subject_description", subject)]));
    Ok(ctx.finish(AspectKind::Motion, p))
}
