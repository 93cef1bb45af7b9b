//! Fixed prompt blocks loaded from `resources/prompts`.

use sha2::{Digest, Sha256};

/// Bumped whenever any bundled template text changes.
pub const TEMPLATE_VERSION: u32 = 1;

macro_rules! resources {
    ($($name:ident => $file:literal,)+) => {
        $(pub const $name: &str = include_str!(concat!("../../resources/prompts/", $file));)+

        const ALL: &[(&str, &str)] = &[$(($file, $name),)+];
    };
}

resources! {
    SUBJECT_BASE => "subject_base.txt",
    SUBJECT_FORMAT => "subject_format.txt",
    SUBJECT_HAS_SHOT_SIZE => "subject_has_shot_size.txt",
    SCENE_BASE => "scene_base.txt",
    SCENE_FORMAT => "scene_format.txt",
    MOTION_BASE => "motion_base.txt",
    MOTION_HAS_SUBJECT_DESC => "motion_has_subject_desc.txt",
    SPATIAL_BASE => "spatial_base.txt",
    SPATIAL_HAS_SUBJECT_SCENE => "spatial_has_subject_scene.txt",
    CAMERA_BASE => "camera_base.txt",
}

/// Hash over every bundled template, name and body.
pub fn template_digest() -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(TEMPLATE_VERSION.to_le_bytes());
    for (name, body) in ALL {
        h.update(name.as_bytes());
        h.update([0]);
        h.update(body.as_bytes());
        h.update([0]);
    }
    h.finalize().into()
}

/// Substitutes `{key}` placeholders in one left-to-right pass, so values
/// that happen to contain braces are never re-expanded.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'outer: while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        for (key, value) in vars {
            let len = key.len() + 2;
            if tail.len() >= len && tail.as_bytes()[len - 1] == b'}' && &tail[1..len - 1] == *key {
                out.push_str(value);
                rest = &tail[len..];
                continue 'outer;
            }
        }
        out.push('{');
        rest = &tail[1..];
    }
    out.push_str(rest);
    out
}
