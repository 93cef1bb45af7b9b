//! Per-video label record and its line-delimited wire format.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::taxonomy::*;

pub const SCHEMA_VERSION: u32 = 1;

/// Set of active camera movements, always serialized in [`Movement`]
/// declaration order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MovementSet(u32);

impl MovementSet {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, m: Movement) {
        self.0 |= 1 << (m as u32);
    }

    pub fn remove(&mut self, m: Movement) {
        self.0 &= !(1 << (m as u32));
    }

    pub fn contains(&self, m: Movement) -> bool {
        self.0 & (1 << (m as u32)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = Movement> + '_ {
        Movement::ALL.iter().copied().filter(move |m| self.contains(*m))
    }

    pub fn has_roll(&self) -> bool {
        self.iter().any(Movement::is_roll)
    }
}

impl FromIterator<Movement> for MovementSet {
    fn from_iter<I: IntoIterator<Item = Movement>>(iter: I) -> Self {
        let mut set = MovementSet::new();
        for m in iter {
            set.insert(m);
        }
        set
    }
}

impl Serialize for MovementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for m in self.iter() {
            seq.serialize_element(&m)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for MovementSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SetVisitor;

        impl<'de> Visitor<'de> for SetVisitor {
            type Value = MovementSet;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of movement keys")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<MovementSet, A::Error> {
                let mut set = MovementSet::new();
                while let Some(m) = seq.next_element::<Movement>()? {
                    if set.contains(m) {
                        return Err(de::Error::custom(format!("duplicate movement {m}")));
                    }
                    set.insert(m);
                }
                Ok(set)
            }
        }

        deserializer.deserialize_seq(SetVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionFlags {
    #[serde(default)]
    pub has_shot_transition: bool,
    pub framing_subject: FramingSubject,
    #[serde(default)]
    pub human_shot: bool,
    #[serde(default)]
    pub non_human_shot: bool,
    #[serde(default)]
    pub change_of_subject_shot: bool,
    #[serde(default)]
    pub clear_subject_dynamic_size: bool,
    #[serde(default)]
    pub clear_subject_atypical_size: bool,
    #[serde(default)]
    pub many_subject_one_focus: bool,
    #[serde(default)]
    pub different_subjects_in_focus: bool,
    #[serde(default)]
    pub many_subject_no_clear_focus: bool,
    #[serde(default)]
    pub scenery_shot: bool,
    pub change_subtype: ChangeSubtype,
    pub complex_shot_type: ComplexShotType,
    #[serde(default)]
    pub overlays: bool,
    pub pov: PointOfView,
}

impl CompositionFlags {
    /// Subject category flags in precedence order, paired with their names.
    pub fn subject_categories(&self) -> [(&'static str, bool); 8] {
        [
            ("human_shot", self.human_shot),
            ("non_human_shot", self.non_human_shot),
            ("change_of_subject_shot", self.change_of_subject_shot),
            ("clear_subject_dynamic_size", self.clear_subject_dynamic_size),
            ("clear_subject_atypical_size", self.clear_subject_atypical_size),
            ("many_subject_one_focus", self.many_subject_one_focus),
            ("different_subjects_in_focus", self.different_subjects_in_focus),
            ("many_subject_no_clear_focus", self.many_subject_no_clear_focus),
        ]
    }
}

impl Default for CompositionFlags {
    fn default() -> Self {
        Self {
            has_shot_transition: false,
            framing_subject: FramingSubject::True,
            human_shot: false,
            non_human_shot: false,
            change_of_subject_shot: false,
            clear_subject_dynamic_size: false,
            clear_subject_atypical_size: false,
            many_subject_one_focus: false,
            different_subjects_in_focus: false,
            many_subject_no_clear_focus: false,
            scenery_shot: false,
            change_subtype: ChangeSubtype::None,
            complex_shot_type: ComplexShotType::Known,
            overlays: false,
            pov: PointOfView::Objective,
        }
    }
}

/// Start/end pair gated by an applicability flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct GatedSpan<T> {
    #[serde(default)]
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<T>,
}

impl<T> Default for GatedSpan<T> {
    fn default() -> Self {
        Self { applicable: false, start: None, end: None }
    }
}

impl<T: Copy + PartialEq> GatedSpan<T> {
    pub fn fixed(value: T) -> Self {
        Self { applicable: true, start: Some(value), end: Some(value) }
    }

    pub fn between(start: T, end: T) -> Self {
        Self { applicable: true, start: Some(start), end: Some(end) }
    }

    /// True when both endpoints are present and differ.
    pub fn changes(&self) -> bool {
        matches!((self.start, self.end), (Some(a), Some(b)) if a != b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleInfo {
    #[serde(flatten)]
    pub span: GatedSpan<CameraAngle>,
    pub dutch: DutchAngle,
}

impl Default for AngleInfo {
    fn default() -> Self {
        Self { span: GatedSpan::default(), dutch: DutchAngle::None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusInfo {
    #[serde(default)]
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<FocusDepth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_start: Option<FocusPlane>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_end: Option<FocusPlane>,
    pub change: FocusChange,
}

impl Default for FocusInfo {
    fn default() -> Self {
        Self { applicable: false, depth: None, plane_start: None, plane_end: None, change: FocusChange::None }
    }
}

impl FocusInfo {
    pub fn plane_changes(&self) -> bool {
        matches!((self.plane_start, self.plane_end), (Some(a), Some(b)) if a != b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSetup {
    pub playback_speed: PlaybackSpeed,
    pub lens_distortion: LensDistortion,
    #[serde(default)]
    pub height_wrt_ground: GatedSpan<GroundHeight>,
    #[serde(default)]
    pub camera_angle: AngleInfo,
    #[serde(default)]
    pub focus: FocusInfo,
}

impl Default for CameraSetup {
    fn default() -> Self {
        Self {
            playback_speed: PlaybackSpeed::Regular,
            lens_distortion: LensDistortion::Regular,
            height_wrt_ground: GatedSpan::default(),
            camera_angle: AngleInfo::default(),
            focus: FocusInfo::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingInfo {
    #[serde(default)]
    pub shot: bool,
    #[serde(default)]
    pub types: Vec<TrackingType>,
    pub subject_size_change: SubjectSizeChange,
}

impl Default for TrackingInfo {
    fn default() -> Self {
        Self { shot: false, types: Vec::new(), subject_size_change: SubjectSizeChange::None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionFlags {
    #[serde(default)]
    pub fixed_camera: bool,
    #[serde(default)]
    pub fixed_camera_with_shake: bool,
    #[serde(default)]
    pub minor_motion: bool,
    #[serde(default)]
    pub simple_motion: bool,
    #[serde(default)]
    pub complex_motion: bool,
    #[serde(default)]
    pub movements: MovementSet,
    pub steadiness: Steadiness,
    pub motion_speed: MotionSpeed,
    #[serde(default)]
    pub tracking: TrackingInfo,
}

impl Default for MotionFlags {
    fn default() -> Self {
        Self {
            fixed_camera: false,
            fixed_camera_with_shake: false,
            minor_motion: false,
            simple_motion: false,
            complex_motion: false,
            movements: MovementSet::new(),
            steadiness: Steadiness::Smooth,
            motion_speed: MotionSpeed::Regular,
            tracking: TrackingInfo::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSizeSpan {
    pub start: ShotSize,
    pub end: ShotSize,
    #[serde(default)]
    pub changes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectHeightSpan {
    #[serde(flatten)]
    pub span: GatedSpan<SubjectHeight>,
    #[serde(default)]
    pub changes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectFraming {
    pub shot_size: ShotSizeSpan,
    #[serde(default = "default_subject_height")]
    pub height_wrt_subject: SubjectHeightSpan,
}

fn default_subject_height() -> SubjectHeightSpan {
    SubjectHeightSpan { span: GatedSpan::default(), changes: false }
}

impl Default for SubjectFraming {
    fn default() -> Self {
        Self {
            shot_size: ShotSizeSpan { start: ShotSize::Medium, end: ShotSize::Medium, changes: false },
            height_wrt_subject: default_subject_height(),
        }
    }
}

fn default_revision() -> u32 {
    1
}

/// All labels for one video. Unknown top-level fields are carried in
/// `extra` and written back on serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveLabelRecord {
    pub schema_version: u32,
    pub video_id: String,
    #[serde(default = "default_revision")]
    pub revision: u32,
    pub media_uri: String,
    pub composition: CompositionFlags,
    pub camera: CameraSetup,
    pub motion: MotionFlags,
    pub framing: SubjectFraming,
    #[serde(default)]
    pub shot_size_description: String,
    #[serde(default)]
    pub subject_height_description: String,
    #[serde(default)]
    pub overall_height_description: String,
    #[serde(default)]
    pub camera_angle_description: String,
    #[serde(default)]
    pub camera_focus_description: String,
    #[serde(default)]
    pub complex_motion_description: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl PrimitiveLabelRecord {
    /// A minimal valid record: objective medium shot of a human subject,
    /// static camera, no optional labels.
    pub fn new(video_id: impl Into<String>, media_uri: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            video_id: video_id.into(),
            revision: 1,
            media_uri: media_uri.into(),
            composition: CompositionFlags { human_shot: true, ..CompositionFlags::default() },
            camera: CameraSetup::default(),
            motion: MotionFlags { fixed_camera: true, steadiness: Steadiness::Static, ..MotionFlags::default() },
            framing: SubjectFraming::default(),
            shot_size_description: String::new(),
            subject_height_description: String::new(),
            overall_height_description: String::new(),
            camera_angle_description: String::new(),
            camera_focus_description: String::new(),
            complex_motion_description: String::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("label record serializes")
    }
}

/// Why a label line could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code} at {path}: {message}")]
pub struct ParseFailure {
    /// One of `parse.malformed`, `taxonomy.unknown_value`, `schema.version`.
    pub code: &'static str,
    pub path: String,
    pub message: String,
}

/// Parses one line of the label stream.
pub fn parse_record(line: &str) -> Result<PrimitiveLabelRecord, ParseFailure> {
    let mut de = serde_json::Deserializer::from_str(line);
    let record: PrimitiveLabelRecord = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let message = err.inner().to_string();
        let code = if message.contains("unknown variant") {
            "taxonomy.unknown_value"
        } else {
            "parse.malformed"
        };
        ParseFailure { code, path, message }
    })?;
    de.end().map_err(|e| ParseFailure {
        code: "parse.malformed",
        path: ".".into(),
        message: e.to_string(),
    })?;
    if record.schema_version != SCHEMA_VERSION {
        return Err(ParseFailure {
            code: "schema.version",
            path: "schema_version".into(),
            message: format!("expected {SCHEMA_VERSION}, got {}", record.schema_version),
        });
    }
    Ok(record)
}
