use super::templates::CAMERA_BASE;
use super::{PolicyContext, PromptText};
use crate::schema::{
    AspectKind, CameraAngle, DutchAngle, FocusChange, FocusDepth, FocusPlane, GroundHeight, MotionSpeed, MovementSet,
    PrimitiveLabelRecord, SubjectSizeChange, TrackingType,
};

const GROUND_TRUTH: &str = "Crucially, instead of inferring these attributes from the video, we have already provided human-labeled ground truth for some of the elements specified above. You should directly use this information in your description and should not infer any details that are not already provided. Your description should be brief, and if anything is normal or unremarkable, you do not need to include it (e.g., if the video is at regular playback speed, there is no need to mention it).";
const CLOSING: &str = "If possible, specify the subject that the camera focuses on when describing camera work. For instance, use 'focus on the man in the foreground' rather than 'focus on the foreground.' Likewise, if the camera follows a subject, avoid the generic phrase 'tracking the subject(s).' Instead, identify the subject and describe the specific type of tracking.";

/// Joins active movements into one sentence, in taxonomy declaration order.
pub fn movement_sentence(movements: &MovementSet) -> String {
    let parts: Vec<&str> = movements.iter().map(|m| m.render()).collect();
    match parts.as_slice() {
        [] => "The camera shows no clear or intentional movement.".to_string(),
        [one] => format!("The camera is {one}."),
        [a, b] => format!("The camera is {a} and {b}."),
        [head @ .., last] => format!("The camera is {}, and {last}.", head.join(", ")),
    }
}

fn tracking_sentence(r: &PrimitiveLabelRecord) -> String {
    let t = &r.motion.tracking;
    let lead = [TrackingType::Side, TrackingType::Tail, TrackingType::Lead, TrackingType::Aerial]
        .into_iter()
        .find(|k| t.types.contains(k));
    let mut s = match lead {
        Some(k) => k.render().to_string(),
        None => "The camera is tracking the subject".to_string(),
    };
    match t.subject_size_change {
        SubjectSizeChange::Larger => s.push_str(". During the tracking shot, the subject becomes larger in the frame."),
        SubjectSizeChange::Smaller => s.push_str(". During the tracking shot, the subject becomes smaller in the frame."),
        SubjectSizeChange::None => {}
    }
    s
}

fn height_start(h: Option<GroundHeight>) -> &'static str {
    h.map_or("at an unknown height", GroundHeight::render)
}

fn height_end(h: Option<GroundHeight>) -> &'static str {
    h.map_or("to an unknown height", GroundHeight::render_end)
}

fn angle(a: Option<CameraAngle>) -> &'static str {
    a.map_or("an unknown angle", CameraAngle::render)
}

fn plane(p: Option<FocusPlane>) -> &'static str {
    p.map_or("focus unknown", FocusPlane::render)
}

pub fn build_camera_prompt(ctx: &PolicyContext) -> PromptText {
    let r = &ctx.record;
    let cam = &r.camera;
    let m = &r.motion;
    let mut p = format!("{CAMERA_BASE}{GROUND_TRUTH}");

    p.push_str("**Playback Speed:** ");
    p.push_str(cam.playback_speed.render());
    p.push_str("**Lens Distortion:** ");
    p.push_str(cam.lens_distortion.render());

    let gh = &cam.height_wrt_ground;
    if gh.applicable {
        if gh.changes() {
            p.push_str(&format!(
                "**Camera Height:** The camera starts {} and then moves {}.",
                height_start(gh.start),
                height_end(gh.end)
            ));
        } else {
            p.push_str(&format!("**Camera Height:** The camera is {}.", height_start(gh.start)));
        }
    } else if !r.overall_height_description.is_empty() {
        p.push_str("**Camera Height:** ");
        p.push_str(&r.overall_height_description);
    } else {
        p.push_str("**Camera Height:** The camera height is unclear or not significant enough to mention (no need to mention).");
    }

    let ang = &cam.camera_angle;
    if ang.span.applicable {
        if ang.span.changes() {
            p.push_str(&format!(
                "**Camera Angle:** The camera angle is initially at {} and then changes to {} due to camera motion.",
                angle(ang.span.start),
                angle(ang.span.end)
            ));
        } else {
            p.push_str(&format!("**Camera Angle:** The camera angle is at {}.", angle(ang.span.start)));
        }
        match ang.dutch {
            DutchAngle::Varying => p.push_str(" The camera is also at a dutch angle that varies due to camera rolling."),
            DutchAngle::Fixed => p.push_str(" The camera is also at a fixed dutch angle during the video."),
            DutchAngle::None => {}
        }
    } else if !r.camera_angle_description.is_empty() {
        p.push_str("**Camera Angle:** ");
        p.push_str(&r.camera_angle_description);
    } else {
        p.push_str("**Camera Angle:** The camera angle is unclear or not significant enough to mention (no need to mention).");
    }

    let f = &cam.focus;
    if f.applicable {
        if f.depth == Some(FocusDepth::Deep) {
            p.push_str("**Camera Focus:** The camera uses a deep focus with a large depth of field.");
        } else {
            if f.depth == Some(FocusDepth::UltraShallow) {
                p.push_str("**Camera Focus:** The camera uses an extremely shallow depth of field, focusing on a very narrow plane.");
            } else {
                p.push_str("**Camera Focus:** The camera uses a shallow depth of field, keeping a limited range in focus.");
            }
            if f.plane_changes() {
                p.push_str(&format!(
                    " The camera starts {}, and later becomes {}.",
                    plane(f.plane_start),
                    plane(f.plane_end)
                ));
            } else {
                p.push_str(&format!(" The camera is {}.", plane(f.plane_start)));
            }
            match f.change {
                FocusChange::RackPull => p.push_str(" The focus plane changes through a rack focus."),
                FocusChange::Tracking => p.push_str(" The camera uses focus tracking to keep the subject in focus."),
                FocusChange::None => {}
            }
        }
    } else if !r.camera_focus_description.is_empty() {
        p.push_str("**Camera Focus:** ");
        p.push_str(&r.camera_focus_description);
    } else {
        p.push_str("**Camera Focus:** The camera focus is unclear or not significant enough to mention (no need to mention).");
    }

    if m.fixed_camera {
        if m.fixed_camera_with_shake {
            p.push_str("**Camera Motion:** The camera is fixed but slightly unsteady, with no intentional movement.");
        } else {
            p.push_str("**Camera Motion:** The camera is completely static, with no movement or shaking.");
        }
    } else {
        if m.complex_motion {
            p.push_str("**Camera Motion:** ");
            p.push_str(&r.complex_motion_description);
        } else {
            if m.minor_motion {
                p.push_str("**Camera Motion:** The camera shows some minor movement.");
            } else if m.simple_motion {
                p.push_str("**Camera Motion:** The camera shows a clear movement pattern.");
            }
            p.push(' ');
            p.push_str(&movement_sentence(&m.movements));
        }
        if m.tracking.shot {
            p.push_str("**Subject Tracking:** ");
            p.push_str(&tracking_sentence(r));
        }
        p.push_str("**Camera Steadiness:** ");
        p.push_str(m.steadiness.render());
        p.push('.');
        if m.motion_speed != MotionSpeed::Regular {
            p.push_str("**Camera Motion Speed**: The camera is ");
            p.push_str(m.motion_speed.render());
        }
    }

    p.push_str(CLOSING);
    ctx.finish(AspectKind::Camera, p)
}
