//! Compiles label records into the five aspect captioning prompts.
//!
//! Each policy is a first-match decision tree over the composition, camera
//! and motion labels. Output is byte-stable: the golden fixtures under
//! `tests/golden` pin every branch.

mod camera;
mod motion;
mod scene;
mod spatial;
mod subject;
pub mod templates;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::schema::{AspectKind, PrimitiveLabelRecord};

pub use camera::{build_camera_prompt, movement_sentence};
pub use motion::build_motion_prompt;
pub use scene::build_scene_prompt;
pub use spatial::build_spatial_prompt;
pub use subject::build_subject_prompt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("{aspect} prompt needs the accepted {needs} caption")]
    MissingCaption { aspect: AspectKind, needs: AspectKind },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptText {
    pub aspect: AspectKind,
    pub text: String,
    /// Hex SHA-256 over the template set, the record and any embedded captions.
    pub inputs_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyContext {
    pub record: PrimitiveLabelRecord,
    pub subject_caption: Option<String>,
    pub scene_caption: Option<String>,
}

impl PolicyContext {
    pub fn new(record: PrimitiveLabelRecord) -> Self {
        Self { record, subject_caption: None, scene_caption: None }
    }

    pub fn with_captions(mut self, subject: impl Into<String>, scene: impl Into<String>) -> Self {
        self.subject_caption = Some(subject.into());
        self.scene_caption = Some(scene.into());
        self
    }

    fn caption(&self, aspect: AspectKind, needs: AspectKind) -> Result<&str, PromptError> {
        let slot = match needs {
            AspectKind::Subject => &self.subject_caption,
            _ => &self.scene_caption,
        };
        slot.as_deref().ok_or(PromptError::MissingCaption { aspect, needs })
    }

    fn digest(&self, aspect: AspectKind) -> String {
        let mut h = Sha256::new();
        h.update(templates::template_digest());
        h.update(aspect.as_str().as_bytes());
        h.update([0]);
        h.update(self.record.to_line().as_bytes());
        for cap in [&self.subject_caption, &self.scene_caption] {
            match cap {
                Some(c) => {
                    h.update([1]);
                    h.update((c.len() as u64).to_le_bytes());
                    h.update(c.as_bytes());
                }
                None => h.update([0]),
            }
        }
        hex::encode(h.finalize())
    }

    fn finish(&self, aspect: AspectKind, text: String) -> PromptText {
        PromptText { aspect, text, inputs_digest: self.digest(aspect) }
    }
}

/// Dispatches to the policy for `aspect`.
pub fn build_prompt(aspect: AspectKind, ctx: &PolicyContext) -> Result<PromptText, PromptError> {
    match aspect {
        AspectKind::Subject => Ok(build_subject_prompt(ctx)),
        AspectKind::Scene => Ok(build_scene_prompt(ctx)),
        AspectKind::Motion => build_motion_prompt(ctx),
        AspectKind::Spatial => build_spatial_prompt(ctx),
        AspectKind::Camera => Ok(build_camera_prompt(ctx)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_tracks_inputs() {
        let ctx = PolicyContext::new(PrimitiveLabelRecord::new("v", "m"));
        let a = build_prompt(AspectKind::Scene, &ctx).unwrap();
        let b = build_prompt(AspectKind::Scene, &ctx).unwrap();
        assert_eq!(a, b);
        let other = PolicyContext::new(PrimitiveLabelRecord::new("w", "m"));
        assert_ne!(a.inputs_digest, build_prompt(AspectKind::Scene, &other).unwrap().inputs_digest);
        let captioned = ctx.clone().with_captions("", "");
        assert_ne!(a.inputs_digest, build_prompt(AspectKind::Scene, &captioned).unwrap().inputs_digest);
    }

    #[test]
    fn motion_and_spatial_need_captions() {
        let ctx = PolicyContext::new(PrimitiveLabelRecord::new("v", "m"));
        assert_eq!(
            build_prompt(AspectKind::Motion, &ctx).unwrap_err(),
            PromptError::MissingCaption { aspect: AspectKind::Motion, needs: AspectKind::Subject }
        );
        let ctx = PolicyContext { subject_caption: Some("A man.".into()), ..ctx };
        assert_eq!(
            build_prompt(AspectKind::Spatial, &ctx).unwrap_err(),
            PromptError::MissingCaption { aspect: AspectKind::Spatial, needs: AspectKind::Scene }
        );
    }
}
