//! Structural validation of label records.

use serde::Serialize;

use super::record::{GatedSpan, PrimitiveLabelRecord};
use super::taxonomy::{ChangeSubtype, DutchAngle, FramingSubject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub path: String,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// No error-level violations. Warnings do not fail a record.
    pub fn passed(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Warning)
    }

    pub fn codes(&self) -> Vec<&'static str> {
        self.errors().map(|v| v.code).collect()
    }

    fn error(&mut self, code: &'static str, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { code, path: path.into(), severity: Severity::Error, message: message.into() });
    }

    fn warn(&mut self, code: &'static str, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { code, path: path.into(), severity: Severity::Warning, message: message.into() });
    }
}

fn check_gated<T>(report: &mut ValidationReport, path: &str, span: &GatedSpan<T>) {
    if [span.start.is_some(), span.end.is_some()] != [span.applicable; 2] {
        report.error("camera.applicability", path, "start/end must be present exactly when applicable");
    }
}

pub fn validate_record(record: &PrimitiveLabelRecord) -> ValidationReport {
    let mut report = ValidationReport::default();
    let comp = &record.composition;
    let motion = &record.motion;
    let cam = &record.camera;

    if motion.fixed_camera && (!motion.movements.is_empty() || motion.tracking.shot) {
        report.error("motion.exclusivity", "motion.movements", "fixed camera cannot carry movements or tracking");
    }
    let classes = [motion.fixed_camera, motion.minor_motion, motion.simple_motion, motion.complex_motion];
    if classes.iter().filter(|b| **b).count() > 1 {
        report.error("motion.motion_class_conflict", "motion", "more than one motion class set");
    }
    if !motion.tracking.shot && !motion.tracking.types.is_empty() {
        report.error("motion.exclusivity", "motion.tracking.types", "tracking types without a tracking shot");
    }

    let has_subtype = comp.change_subtype != ChangeSubtype::None;
    if has_subtype != comp.change_of_subject_shot {
        report.error(
            "composition.change_subtype",
            "composition.change_subtype",
            "change subtype must be set exactly when change_of_subject_shot is",
        );
    }

    let categories = comp.subject_categories();
    if comp.framing_subject == FramingSubject::False {
        for (name, set) in categories {
            if set {
                report.error(
                    "composition.scenery_conflict",
                    format!("composition.{name}"),
                    "scenery framing forbids subject categories",
                );
            }
        }
    }
    let active = categories.iter().filter(|(_, set)| *set).count();
    if active > 1 {
        report.warn(
            "composition.multiple_categories",
            "composition",
            format!("{active} subject categories set; first in precedence order wins"),
        );
    }

    check_gated(&mut report, "camera.height_wrt_ground", &cam.height_wrt_ground);
    check_gated(&mut report, "camera.camera_angle", &cam.camera_angle.span);
    let focus = &cam.focus;
    let focus_fields = [focus.depth.is_some(), focus.plane_start.is_some(), focus.plane_end.is_some()];
    if focus.applicable && focus_fields != [true; 3] {
        report.error("camera.applicability", "camera.focus", "applicable focus needs depth and both planes");
    }
    if !focus.applicable && focus_fields != [false; 3] {
        report.error("camera.applicability", "camera.focus", "focus fields set while not applicable");
    }

    if cam.camera_angle.dutch == DutchAngle::Varying && !motion.movements.has_roll() {
        report.error("camera.dutch_roll", "camera.camera_angle.dutch", "varying dutch angle requires a roll movement");
    }

    let shot = &record.framing.shot_size;
    if shot.changes != (shot.start != shot.end) {
        report.error("framing.changes_mismatch", "framing.shot_size.changes", "changes flag disagrees with start/end");
    }
    let height = &record.framing.height_wrt_subject;
    if height.changes != height.span.changes() {
        report.error(
            "framing.changes_mismatch",
            "framing.height_wrt_subject.changes",
            "changes flag disagrees with start/end",
        );
    }
    let height_fields = [height.span.start.is_some(), height.span.end.is_some()];
    let expected = [height.span.applicable; 2];
    if height_fields != expected {
        report.error(
            "framing.applicability",
            "framing.height_wrt_subject",
            "start/end must be present exactly when applicable",
        );
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::taxonomy::*;

    fn base() -> PrimitiveLabelRecord {
        PrimitiveLabelRecord::new("v", "m")
    }

    #[test]
    fn default_record_passes() {
        let r = validate_record(&base());
        assert!(r.violations.is_empty(), "{:?}", r);
    }

    #[test]
    fn fixed_camera_with_pan() {
        let mut r = base();
        r.motion.movements.insert(Movement::PanRight);
        assert_eq!(validate_record(&r).codes(), vec!["motion.exclusivity"]);
    }

    #[test]
    fn revealing_change_passes() {
        let mut r = base();
        r.composition.human_shot = false;
        r.composition.change_of_subject_shot = true;
        r.composition.change_subtype = ChangeSubtype::Revealing;
        assert!(validate_record(&r).passed());
    }

    #[test]
    fn subtype_without_flag() {
        let mut r = base();
        r.composition.change_subtype = ChangeSubtype::Switching;
        assert_eq!(validate_record(&r).codes(), vec!["composition.change_subtype"]);
    }

    #[test]
    fn scenery_with_human() {
        let mut r = base();
        r.composition.framing_subject = FramingSubject::False;
        assert_eq!(validate_record(&r).codes(), vec!["composition.scenery_conflict"]);
        r.composition.human_shot = false;
        r.composition.scenery_shot = true;
        assert!(validate_record(&r).passed());
    }

    #[test]
    fn multiple_categories_only_warn() {
        let mut r = base();
        r.composition.non_human_shot = true;
        let rep = validate_record(&r);
        assert!(rep.passed());
        assert_eq!(rep.warnings().count(), 1);
    }

    #[test]
    fn applicability_and_dutch() {
        let mut r = base();
        r.camera.height_wrt_ground.applicable = true;
        r.camera.height_wrt_ground.start = Some(GroundHeight::Eye);
        assert_eq!(validate_record(&r).codes(), vec!["camera.applicability"]);

        let mut r = base();
        r.camera.camera_angle.dutch = DutchAngle::Varying;
        assert_eq!(validate_record(&r).codes(), vec!["camera.dutch_roll"]);
        r.motion.fixed_camera = false;
        r.motion.simple_motion = true;
        r.motion.movements.insert(Movement::RollCw);
        assert!(validate_record(&r).passed());
    }

    #[test]
    fn motion_classes_conflict() {
        let mut r = base();
        r.motion.simple_motion = true;
        assert_eq!(validate_record(&r).codes(), vec!["motion.motion_class_conflict"]);
    }

    #[test]
    fn shot_size_change_flag() {
        let mut r = base();
        r.framing.shot_size.end = ShotSize::CloseUp;
        assert_eq!(validate_record(&r).codes(), vec!["framing.changes_mismatch"]);
        r.framing.shot_size.changes = true;
        assert!(validate_record(&r).passed());
    }
}
