//! Primitive taxonomy, label records and their validation.

pub mod catalog;
pub mod record;
pub mod taxonomy;
pub mod validate;

pub use catalog::{taxonomy_catalog, CatalogEntry};
pub use record::{
    parse_record, AngleInfo, CameraSetup, CompositionFlags, FocusInfo, GatedSpan, MotionFlags, MovementSet,
    ParseFailure, PrimitiveLabelRecord, ShotSizeSpan, SubjectFraming, SubjectHeightSpan, TrackingInfo,
    SCHEMA_VERSION,
};
pub use taxonomy::*;
pub use validate::{validate_record, Severity, ValidationReport, Violation};
