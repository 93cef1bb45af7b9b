use super::templates::{SCENE_BASE, SCENE_FORMAT};
use super::{PolicyContext, PromptText};
use crate::schema::{AspectKind, PointOfView};

const OVERLAYS: &str = "Please note that the video includes overlay elements, such as text or visuals like titles, subtitles, captions, icons, watermarks, heads-up displays (HUD), or framing elements. In your description, specify that these are overlays (not part of the scene) and describe their content and placement.";

pub fn build_scene_prompt(ctx: &PolicyContext) -> PromptText {
    let c = &ctx.record.composition;
    let mut p = format!("{SCENE_BASE}{SCENE_FORMAT}");

    let mut pov = format!("[Point of view information for {}]", c.pov.render());
    if c.pov == PointOfView::Objective {
        pov.push_str(" (no need to mention).");
    }
    if c.overlays {
        p.push_str(OVERLAYS);
    }
    p.push_str("In addition, you do not need to infer the camera's point of view, as this information is already provided. Please integrate the following point of view information into your caption:Point of View Information: **");
    p.push_str(&pov);
    p.push_str("**");
    ctx.finish(AspectKind::Scene, p)
}
