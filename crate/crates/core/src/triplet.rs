//! The curation unit: one video and aspect with its pre-caption, critiques
//! and post-caption.

use serde::{Deserialize, Serialize};

use crate::schema::AspectKind;

pub const NO_EDIT_CRITIQUE: &str = "The caption is accurate and requires no edits, so it should remain exactly the same.";

/// True when `text` is the no-edit sentence, ignoring surrounding whitespace.
pub fn is_no_edit(text: &str) -> bool {
    text.trim() == NO_EDIT_CRITIQUE
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectTriplet {
    pub pre_caption: String,
    pub critiques: Vec<String>,
    pub post_caption: Option<String>,
    /// Likert 1..5 for the pre-caption.
    pub human_score: Option<u8>,
}

impl AspectTriplet {
    /// The critique that produced the final post-caption.
    pub fn final_critique(&self) -> Option<&str> {
        self.critiques.last().map(String::as_str)
    }

    pub fn needs_critique(&self) -> bool {
        self.human_score.is_some_and(|s| s < 5)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletRecord {
    pub video_id: String,
    pub aspect: AspectKind,
    pub media_uri: String,
    #[serde(flatten)]
    pub triplet: AspectTriplet,
}
