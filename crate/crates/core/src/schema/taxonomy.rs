//! Closed enumerations of the primitive taxonomy.
//!
//! Every enum carries its wire key (snake_case, as it appears in label
//! records) and a render string used by prompt compilation. Render strings
//! for shot size, subject height, camera height, angle, focus plane,
//! steadiness, motion speed and playback speed are normative prompt text.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// Error returned when a string is not a member of a taxonomy enum.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown value {value:?} for taxonomy field {field}")]
pub struct UnknownValue {
    pub field: &'static str,
    pub value: String,
}

macro_rules! taxonomy_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $field:literal {
            $($variant:ident => $key:literal, $render:expr;)+
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant,)+
        }

        impl $name {
            /// Catalog field name.
            pub const FIELD: &'static str = $field;
            /// All members, in declaration order.
            pub const ALL: &'static [$name] = &[$($name::$variant,)+];
            /// Wire keys, in declaration order.
            pub const KEYS: &'static [&'static str] = &[$($key,)+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $key,)+
                }
            }

            pub fn render(self) -> &'static str {
                match self {
                    $($name::$variant => $render,)+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownValue;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($key => Ok($name::$variant),)+
                    other => Err(UnknownValue { field: $field, value: other.to_string() }),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                struct KeyVisitor;

                impl<'de> Visitor<'de> for KeyVisitor {
                    type Value = $name;

                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        write!(f, "a {} value", $field)
                    }

                    fn visit_str<E: de::Error>(self, v: &str) -> Result<$name, E> {
                        v.parse().map_err(|_| E::unknown_variant(v, $name::KEYS))
                    }
                }

                deserializer.deserialize_str(KeyVisitor)
            }
        }
    };
}

taxonomy_enum! {
    /// The five caption dimensions.
    AspectKind, "aspect" {
        Subject => "subject", "subject";
        Scene => "scene", "scene";
        Motion => "motion", "motion";
        Spatial => "spatial", "spatial";
        Camera => "camera", "camera";
    }
}

impl AspectKind {
    /// Title-case label used in merge prompts and reports.
    pub fn title(self) -> &'static str {
        match self {
            AspectKind::Subject => "Subject",
            AspectKind::Scene => "Scene",
            AspectKind::Motion => "Motion",
            AspectKind::Spatial => "Spatial",
            AspectKind::Camera => "Camera",
        }
    }
}

taxonomy_enum! {
    ShotSize, "shot_size" {
        Unknown => "unknown", "unknown";
        ExtremeWide => "extreme_wide", "an extreme wide shot";
        Wide => "wide", "a wide shot";
        Full => "full", "a full shot";
        MediumFull => "medium_full", "a medium full shot";
        Medium => "medium", "a medium shot";
        MediumCloseUp => "medium_close_up", "a medium close-up shot";
        CloseUp => "close_up", "a close-up shot";
        ExtremeCloseUp => "extreme_close_up", "an extreme close-up shot";
    }
}

taxonomy_enum! {
    SubjectHeight, "height_wrt_subject" {
        Above => "above", "above the subject";
        At => "at", "at the subject's level";
        Below => "below", "below the subject";
        Unknown => "unknown", "unknown";
    }
}

taxonomy_enum! {
    PlaybackSpeed, "playback_speed" {
        Regular => "regular", "The video is at regular playback speed (no need to mention).";
        SlowMotion => "slow_motion", "The video is in slow motion";
        FastMotion => "fast_motion", "The video is in fast motion";
        TimeLapse => "time_lapse", "The video is a time-lapse";
        StopMotion => "stop_motion", "The video uses stop motion animation";
        SpeedRamp => "speed_ramp", "The video uses speed ramping (changing between fast and slow motion)";
        TimeReversed => "time_reversed", "The video plays in reverse";
    }
}

taxonomy_enum! {
    LensDistortion, "lens_distortion" {
        Regular => "regular", "No lens distortion (no need to mention).";
        Barrel => "barrel", "The video features mild barrel distortion where lines near the frame edges bow slightly outward.";
        Fisheye => "fisheye", "The video shows extreme fisheye distortion where most lines curve strongly outward.";
    }
}

taxonomy_enum! {
    GroundHeight, "height_wrt_ground" {
        Ground => "ground", "at a ground level";
        Hip => "hip", "at a hip level (below the waist and above the knees)";
        Eye => "eye", "at an eye level (above the waist)";
        Overhead => "overhead", "at an overhead level (around second floor height)";
        Aerial => "aerial", "at an aerial level";
        Water => "water", "above water";
        Underwater => "underwater", "underwater";
    }
}

impl GroundHeight {
    /// Phrase used for the end point of a height transition.
    pub fn render_end(self) -> &'static str {
        match self {
            GroundHeight::Ground => "to a ground level",
            GroundHeight::Hip => "to a hip level (below the waist and above the knees)",
            GroundHeight::Eye => "to an eye level (above the waist)",
            GroundHeight::Overhead => "to an overhead level (around second floor height)",
            GroundHeight::Aerial => "to an aerial level",
            GroundHeight::Water => "above water",
            GroundHeight::Underwater => "underwater",
        }
    }
}

taxonomy_enum! {
    CameraAngle, "camera_angle" {
        BirdEye => "bird_eye", "a bird's-eye view angle (looking down directly at the ground)";
        High => "high", "a high angle (looking down from above)";
        Level => "level", "a level angle (looking straight ahead)";
        Low => "low", "a low angle (looking up from below)";
        WormEye => "worm_eye", "a worm's-eye view angle (looking directly up)";
    }
}

taxonomy_enum! {
    DutchAngle, "dutch_angle" {
        None => "none", "no dutch angle";
        Fixed => "fixed", "a fixed dutch angle during the video";
        Varying => "varying", "a dutch angle that varies due to camera rolling";
    }
}

taxonomy_enum! {
    FocusDepth, "focus_depth" {
        Deep => "deep", "a deep focus with a large depth of field";
        Shallow => "shallow", "a shallow depth of field, keeping a limited range in focus";
        UltraShallow => "ultra_shallow", "an extremely shallow depth of field, focusing on a very narrow plane";
    }
}

taxonomy_enum! {
    FocusPlane, "focus_plane" {
        Foreground => "foreground", "focused on the foreground";
        MiddleGround => "middle_ground", "focused on the midground";
        Background => "background", "focused on the background";
        OutOfFocus => "out_of_focus", "out of focus";
    }
}

taxonomy_enum! {
    FocusChange, "focus_change" {
        None => "none", "no focus change";
        RackPull => "rack_pull", "a rack focus";
        Tracking => "tracking", "focus tracking to keep the subject in focus";
    }
}

taxonomy_enum! {
    Steadiness, "steadiness" {
        Static => "static", "The camera is stationary";
        VerySmooth => "very_smooth", "The camera movement is very smooth with no shaking";
        Smooth => "smooth", "The camera movement is smooth with minimal shaking";
        Unsteady => "unsteady", "The camera movement is slightly unsteady with some shaking";
        VeryUnsteady => "very_unsteady", "The camera movement is unsteady with noticeable shaking";
    }
}

taxonomy_enum! {
    MotionSpeed, "camera_motion_speed" {
        Slow => "slow", "moving slowly.";
        Regular => "regular", "moving at a regular speed (no need to mention).";
        Fast => "fast", "moving quickly.";
    }
}

taxonomy_enum! {
    /// Camera movement primitives. Declaration order is the join order used
    /// when several movements are described in one sentence.
    Movement, "movement" {
        RollCw => "roll_cw", "rolling clockwise";
        RollCcw => "roll_ccw", "rolling counterclockwise";
        Forward => "forward", "moving forward";
        Backward => "backward", "moving backward";
        ZoomIn => "zoom_in", "zooming in";
        ZoomOut => "zoom_out", "zooming out";
        Upward => "upward", "moving up";
        Downward => "downward", "moving down";
        TiltUp => "tilt_up", "tilting up";
        TiltDown => "tilt_down", "tilting down";
        PanRight => "pan_right", "panning right";
        PanLeft => "pan_left", "panning left";
        Leftward => "leftward", "moving left";
        Rightward => "rightward", "moving right";
        CraneUp => "crane_up", "craning up in an arc";
        CraneDown => "crane_down", "craning down in an arc";
        ArcCw => "arc_cw", "arcing clockwise";
        ArcCcw => "arc_ccw", "arcing counterclockwise";
    }
}

impl Movement {
    pub fn is_roll(self) -> bool {
        matches!(self, Movement::RollCw | Movement::RollCcw)
    }
}

taxonomy_enum! {
    TrackingType, "tracking_type" {
        Side => "side", "The camera is tracking the subject from the side";
        Tail => "tail", "The camera is following the subject from behind";
        Lead => "lead", "The camera is leading the subject from the front";
        Aerial => "aerial", "The camera is tracking the subject from an aerial view";
        Pan => "pan", "pan tracking shot";
        Tilt => "tilt", "tilt tracking shot";
        Arc => "arc", "arc tracking shot";
        FrontSide => "front_side", "front-side tracking shot";
        RearSide => "rear_side", "rear-side tracking shot";
    }
}

taxonomy_enum! {
    SubjectSizeChange, "tracking_subject_size_change" {
        None => "none", "no size change";
        Larger => "larger", "the subject becomes larger in the frame";
        Smaller => "smaller", "the subject becomes smaller in the frame";
    }
}

taxonomy_enum! {
    /// Whether the shot frames a subject. `Undetermined` is the third state
    /// the prompt policies branch on.
    FramingSubject, "framing_subject" {
        True => "true", "framing a subject";
        False => "false", "scenery shot without a framed subject";
        Undetermined => "undetermined", "subject framing undetermined";
    }
}

taxonomy_enum! {
    ChangeSubtype, "change_subtype" {
        None => "none", "no change of subject";
        Revealing => "revealing", "a revealing shot of the subject";
        Disappearing => "disappearing", "main subjects disappearing from the frame";
        Switching => "switching", "main subjects switching from one to another";
    }
}

taxonomy_enum! {
    ComplexShotType, "complex_shot_type" {
        Known => "known", "known shot type";
        Unknown => "unknown", "a complex scenario with ambiguous subjects or an abstract shot";
    }
}

taxonomy_enum! {
    PointOfView, "pov" {
        Objective => "objective", "objective_pov";
        FirstPerson => "first_person", "first_person_pov";
        Selfie => "selfie", "selfie_pov";
        Overhead => "overhead", "overhead_pov";
        LockedOn => "locked_on", "locked_on_pov";
        Dashcam => "dashcam", "dashcam_pov";
        Drone => "drone", "drone_pov";
        Broadcast => "broadcast", "broadcast_pov";
        ScreenRecording => "screen_recording", "screen_recording_pov";
        ThirdPersonOverShoulder => "third_person_over_shoulder", "third_person_over_shoulder_pov";
        ThirdPersonOverHip => "third_person_over_hip", "third_person_over_hip_pov";
        ThirdPersonFullBodyGame => "third_person_full_body_game", "third_person_full_body_game_pov";
        ThirdPersonTopDownGame => "third_person_top_down_game", "third_person_top_down_game_pov";
        ThirdPersonSideViewGame => "third_person_side_view_game", "third_person_side_view_game_pov";
        ThirdPersonIsometricGame => "third_person_isometric_game", "third_person_isometric_game_pov";
        Unknown => "unknown", "unknown_pov";
    }
}
