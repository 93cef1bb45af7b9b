use super::templates::{fill, SPATIAL_BASE, SPATIAL_HAS_SUBJECT_SCENE};
use super::{PolicyContext, PromptError, PromptText};
use crate::schema::{AspectKind, ChangeSubtype, ComplexShotType, SubjectHeight};

const HUMAN: &str = "Please note that the video features **salient human subjects**, so you should focus on describing the spatial framing and movements of them.";
const NON_HUMAN: &str = "Please note that the video features **salient non-human subjects**, so you should focus on describing the spatial framing and movements of them.";
const REVEALING: &str = "Please note that the video is a **revealing shot of the subject**.";
const DISAPPEARING: &str = "Please note that the video features **main subjects disappearing from the frame**.";
const SWITCHING: &str = "Please note that the video features **main subjects switching from one to another**.";
const DYNAMIC: &str = "Please note that the **main subject's framing (shot size) is not stable** throughout the video, so the description should emphasize this.";
const ATYPICAL: &str = "Please note that the **main subjects exhibit atypical posture or anatomy**, so the description should reflect this.";
const ONE_FOCUS: &str = "Please note that the video features **multiple subjects with a clear main focus**, so the description should focus on the main subject.";
const DIFFERENT: &str = "Please note that the video features **multiple different subjects in focus**, so the description should clearly distinguish their types and relationships.";
const NO_CLEAR_FOCUS: &str = "Please note that this video contains **multiple subjects without a clear main focus**. Briefly describe the spatial positions and movements of salient subjects while providing a concise overview of secondary subjects, or describe all the spatial composition of all subjects collectively as a group if that is more appropriate.";
const SCENERY: &str = "Please note that the video is a **scenery shot**. You do not need to describe the subjects. Just note that briefly in one to three sentences.";
const COMPLEX: &str = "Please note that the video features a **complex scenario** with ambiguous subjects or it is an abstract shot. Please try your best to describe the spatial positions and movements of the main subjects or objects in the video.";
const HAS_DESCRIPTION: &str = "The description below already mentions the spatial framing information about the subjects or scenery in this video. Use this caption as a reference to draft the spatial framing and dynamics description. Simply expand on it to fully capture other spatial positions and movements. Do not infer the any spatial framing information already mentioned below.";
const COMPLEX_SHOT_SIZE: &str = "Shot Size Information: The video features a complex scenario with ambiguous subjects or it is an abstract shot. Please try your best to describe the spatial positions and movements of the main subjects or objects in the video. Do not use shot size to describe the spatial framing.";

#[derive(Clone, Copy, PartialEq)]
enum Status {
    HasSubject,
    NoSubject,
    ChangeOfSubject,
    HasDescription,
    Complex,
}

fn height(h: Option<SubjectHeight>) -> &'static str {
    h.map_or("unknown", SubjectHeight::render)
}

pub fn build_spatial_prompt(ctx: &PolicyContext) -> Result<PromptText, PromptError> {
    let subject = ctx.caption(AspectKind::Spatial, AspectKind::Subject)?;
    let scene = ctx.caption(AspectKind::Spatial, AspectKind::Scene)?;
    let r = &ctx.record;
    let c = &r.composition;
    let shot = &r.framing.shot_size;
    let h = &r.framing.height_wrt_subject;

    let mut p = String::from(SPATIAL_BASE);
    p.push_str(&fill(
        SPATIAL_HAS_SUBJECT_SCENE,
        &[("subject_description", subject), ("scene_description", scene)],
    ));

    let status;
    if c.human_shot {
        p.push_str(HUMAN);
        status = Status::HasSubject;
    } else if c.non_human_shot {
        p.push_str(NON_HUMAN);
        status = Status::HasSubject;
    } else if c.change_of_subject_shot {
        status = Status::ChangeOfSubject;
        match c.change_subtype {
            ChangeSubtype::Revealing => {
                p.push_str(REVEALING);
                p.push_str(&format!(
                    "Shot Size Information: The video begins with no subject. It then becomes {} of the subject.",
                    shot.end.render()
                ));
                if h.span.applicable {
                    p.push_str(&format!(
                        "When the subject is revealed, the camera is positioned {}.",
                        height(h.span.end)
                    ));
                }
            }
            ChangeSubtype::Disappearing => {
                p.push_str(DISAPPEARING);
                p.push_str(&format!(
                    "Shot Size Information: The video begins with {} of the subject. Then the subject disappears.",
                    shot.start.render()
                ));
                if h.span.applicable {
                    p.push_str(&format!(
                        "Before the subject disappears, the camera is positioned {}.",
                        height(h.span.start)
                    ));
                }
            }
            ChangeSubtype::Switching => {
                p.push_str(SWITCHING);
                p.push_str(&format!(
                    "Shot Size Information: The video begins with {} of the first subject. Then it becomes {} of the second subject.",
                    shot.start.render(),
                    shot.end.render()
                ));
                if h.span.applicable {
                    p.push_str(&format!(
                        "The camera is positioned {} when the first subject is in focus, and {} when the second subject is in focus.",
                        height(h.span.start),
                        height(h.span.end)
                    ));
                }
            }
            ChangeSubtype::None => {}
        }
    } else if c.clear_subject_dynamic_size {
        p.push_str(DYNAMIC);
        status = Status::HasSubject;
    } else if c.clear_subject_atypical_size {
        p.push_str(ATYPICAL);
        status = Status::HasSubject;
    } else if c.many_subject_one_focus {
        p.push_str(ONE_FOCUS);
        status = Status::HasSubject;
    } else if c.different_subjects_in_focus {
        p.push_str(DIFFERENT);
        status = Status::HasSubject;
    } else if c.many_subject_no_clear_focus {
        p.push_str(NO_CLEAR_FOCUS);
        status = Status::HasSubject;
    } else if c.scenery_shot {
        p.push_str(SCENERY);
        status = Status::NoSubject;
    } else if c.complex_shot_type == ComplexShotType::Unknown || r.shot_size_description.is_empty() {
        p.push_str(COMPLEX);
        status = Status::Complex;
    } else {
        status = Status::HasDescription;
        p.push_str(HAS_DESCRIPTION);
        p.push_str("Shot Size Information: ");
        p.push_str(&r.shot_size_description);
        if h.span.applicable {
            if h.changes {
                p.push_str(&format!(
                    "Camera Height Relative to Subjects: The camera is initially positioned {} and then changes to {}.",
                    height(h.span.start),
                    height(h.span.end)
                ));
            } else {
                p.push_str(&format!(
                    "Camera Height Relative to Subjects: The camera is positioned {}.",
                    height(h.span.start)
                ));
            }
        } else if !r.subject_height_description.is_empty() {
            p.push_str("Camera Height Relative to Subjects: ");
            p.push_str(&r.subject_height_description);
        }
    }

    match status {
        Status::HasSubject => {
            if shot.changes {
                p.push_str(&format!(
                    "Shot Size Information: The video begins with {} of the subjects. It then changes to {}.",
                    shot.start.render(),
                    shot.end.render()
                ));
            } else {
                p.push_str(&format!(
                    "Shot Size Information: The video shows {} of the subjects.",
                    shot.start.render()
                ));
            }
            if h.span.applicable {
                if h.changes {
                    p.push_str(&format!(
                        "Camera Height Relative to Subjects: The camera is initially positioned {}. It then changes to {}.",
                        height(h.span.start),
                        height(h.span.end)
                    ));
                } else {
                    p.push_str(&format!(
                        "Camera Height Relative to Subjects: The camera is positioned {}.",
                        height(h.span.start)
                    ));
                }
            } else if !r.subject_height_description.is_empty() {
                p.push_str("Camera Height Relative to Subjects: ");
                p.push_str(&r.subject_height_description);
            }
        }
        Status::NoSubject => {
            if shot.changes {
                p.push_str(&format!(
                    "Shot Size Information: The video begins with {} of the scenery. It then changes to {}.",
                    shot.start.render(),
                    shot.end.render()
                ));
            } else {
                p.push_str(&format!(
                    "Shot Size Information: The video shows {} of the scenery.",
                    shot.start.render()
                ));
            }
        }
        Status::Complex => p.push_str(COMPLEX_SHOT_SIZE),
        Status::ChangeOfSubject | Status::HasDescription => {}
    }

    Ok(ctx.finish(AspectKind::Spatial, p))
}
