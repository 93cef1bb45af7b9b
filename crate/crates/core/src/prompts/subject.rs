use super::templates::{fill, SUBJECT_BASE, SUBJECT_FORMAT, SUBJECT_HAS_SHOT_SIZE};
use super::{PolicyContext, PromptText};
use crate::schema::{AspectKind, ChangeSubtype, ComplexShotType, FramingSubject};

const TRANSITION: &str = "This video contains one or more shot transitions. Please describe the subject of each segment in a single fluent paragraph.";
const SCENERY: &str = "The video is a scenery shot. You do not need to describe the subject. Please concisely specify the type of scenery shot (e.g., a landscape or cityscape scenery shot) in a single fluent paragraph. Also explain why there is no main subject, such as the focus being on the environment, atmosphere, or scale rather than a specific object. Just note that briefly in one to three sentences.";
const NO_CLEAR_FOCUS: &str = "Please note that this video contains **multiple subjects with no clear main focus**. Because it does not emphasize any specific subject, please briefly describe the types of subjects without going into too much detail. You may also describe the subjects collectively as a group.";
const HUMAN: &str = "Please note that the video features salient **human** subjects, so the description should focus on them.";
const NON_HUMAN: &str = "Please note that the video features salient **non-human** subjects, so the description should focus on them.";
const REVEALING: &str = "Please note that the video is a **revealing shot of the subject**, so the description should reflect this by explaining how the subject is revealed through either subject movement or camera movement.";
const DISAPPEARING: &str = "Please note that the video features the main subjects **disappearing from the frame**, so the description should reflect this by explaining how they exit, whether through subject movement or camera movement.";
const SWITCHING: &str = "Please note that the video features the main subjects **switching from one to another**, so the description should reflect this by explaining how the transition occurs, whether through subject movement or camera movement.";
const DYNAMIC: &str = "Please note that the video has a **main subject with dynamic size**, so the description should focus on them. Don't mention the background scene and other motion.";
const ATYPICAL: &str = "Focus on describing the **atypical appearance** of the main subjects in the video. Avoid mentioning the background or subject movements.";
const ONE_FOCUS: &str = "Please note that the video features **multiple subjects with one clear main focus**, so you need to clarify who the main subject is. The description should focus on the details of the main subject while concisely summarizing secondary subjects and describing their relationship to the main subject if clear.";
const DIFFERENT: &str = "Please note that the video features **multiple different subjects in focus**, so the description should clearly distinguish their types and relationships.";
const COMPLEX: &str = "Please note that the video features a **complex scenario** with ambiguous subjects or it is an abstract shot. Please try your best to describe the main subjects or objects in the video.";

pub fn build_subject_prompt(ctx: &PolicyContext) -> PromptText {
    let r = &ctx.record;
    let c = &r.composition;

    if c.has_shot_transition {
        return ctx.finish(AspectKind::Subject, format!("{SUBJECT_BASE}{TRANSITION}"));
    }
    if c.framing_subject == FramingSubject::False {
        return ctx.finish(AspectKind::Subject, format!("{SCENERY}{SUBJECT_FORMAT}"));
    }

    let mut p = String::from(SUBJECT_BASE);
    if c.framing_subject == FramingSubject::Undetermined && c.many_subject_no_clear_focus {
        p.push_str(NO_CLEAR_FOCUS);
        p.push_str(SUBJECT_FORMAT);
        return ctx.finish(AspectKind::Subject, p);
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
    } else if c.complex_shot_type == ComplexShotType::Unknown || r.shot_size_description.is_empty() {
        p.push_str(COMPLEX);
    } else {
        p.push_str(&fill(SUBJECT_HAS_SHOT_SIZE, &[("shot_size_description", &r.shot_size_description)]));
    }
    p.push_str(SUBJECT_FORMAT);
    ctx.finish(AspectKind::Subject, p)
}
