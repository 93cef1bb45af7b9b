//! Flat listing of every taxonomy value with its render string.

use serde::Serialize;

use super::taxonomy::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub field: &'static str,
    pub value: &'static str,
    pub render: &'static str,
}

macro_rules! catalog_fields {
    ($($ty:ty),+ $(,)?) => {
        /// Every enum value, grouped by field in a fixed order.
        pub fn taxonomy_catalog() -> Vec<CatalogEntry> {
            let mut out = Vec::new();
            $(
                for v in <$ty>::ALL {
                    out.push(CatalogEntry { field: <$ty>::FIELD, value: v.as_str(), render: v.render() });
                }
            )+
            out
        }

        /// Whether `value` parses as a member of catalog field `field`.
        pub fn accepts(field: &str, value: &str) -> bool {
            $(
                if field == <$ty>::FIELD {
                    return value.parse::<$ty>().is_ok();
                }
            )+
            false
        }
    };
}

catalog_fields!(
    AspectKind,
    ShotSize,
    SubjectHeight,
    PlaybackSpeed,
    LensDistortion,
    GroundHeight,
    CameraAngle,
    DutchAngle,
    FocusDepth,
    FocusPlane,
    FocusChange,
    Steadiness,
    MotionSpeed,
    Movement,
    TrackingType,
    SubjectSizeChange,
    FramingSubject,
    ChangeSubtype,
    ComplexShotType,
    PointOfView,
);
