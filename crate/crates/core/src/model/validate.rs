//! Structural validation of descriptions and anticipations.
//!
//! Violations are data, not failures: the validator never errors on untrusted
//! input, it reports. An empty report means the description honours every
//! model invariant including the dimension-partition property.

use super::{ElementId, ScenarioAnticipation, ScenarioDescription, TimeInterval};
use crate::vocab::Unit;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Orientation matrices must be proper rotations up to this tolerance.
pub const ROTATION_TOL: f64 = 1e-6;
/// Snapshot times must hit the trajectory grid up to this tolerance.
pub const GRID_TOL: f64 = 1e-9;

/// Payload keys of the semantic annotation schema.
pub const SEMANTIC_KEYS: &[&str] = &["class", "attributes", "state", "affordances"];
/// Payload keys of the spatial annotation schema.
pub const SPATIAL_KEYS: &[&str] = &[
    "position",
    "orientation",
    "distance_to_ego",
    "occupancy",
    "topology",
];
/// Payload keys of the temporal annotation schema.
pub const TEMPORAL_KEYS: &[&str] = &[
    "interval",
    "velocity_samples",
    "acceleration_samples",
    "state_sequence",
    "visibility_sequence",
    "orderings",
    "periodicity",
];
/// Payload keys of the physical annotation schema.
pub const PHYSICAL_KEYS: &[&str] = &["model", "material_tags", "constraint_set", "violations"];

/// Stable machine-readable violation codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    Structural,
    WindowInvalid,
    LayerIdRange,
    RuleIdDuplicate,
    UtteranceOrder,
    ModalitySampleOrder,
    TrajectoryOrder,
    OrientationInvalid,
    SnapshotOutsideWindow,
    SnapshotOffGrid,
    IntervalInvalid,
    IntervalOutsideWindow,
    StateSequenceGap,
    StateSequenceOverlap,
    ExtentNonPositive,
    SelfRelation,
    NegativeDistance,
    UnknownElement,
    DuplicateAnnotation,
    DimPartition,
    ConstraintParams,
    PeriodNonPositive,
    HorizonInvalid,
    PredictedTimeOutOfRange,
    JustificationUnresolved,
}

impl ViolationCode {
    pub fn token(&self) -> &'static str {
        match self {
            ViolationCode::Structural => "STRUCTURAL",
            ViolationCode::WindowInvalid => "WINDOW_INVALID",
            ViolationCode::LayerIdRange => "LAYER_ID_RANGE",
            ViolationCode::RuleIdDuplicate => "RULE_ID_DUPLICATE",
            ViolationCode::UtteranceOrder => "UTTERANCE_ORDER",
            ViolationCode::ModalitySampleOrder => "MODALITY_SAMPLE_ORDER",
            ViolationCode::TrajectoryOrder => "TRAJECTORY_ORDER",
            ViolationCode::OrientationInvalid => "ORIENTATION_INVALID",
            ViolationCode::SnapshotOutsideWindow => "SNAPSHOT_OUTSIDE_WINDOW",
            ViolationCode::SnapshotOffGrid => "SNAPSHOT_OFF_GRID",
            ViolationCode::IntervalInvalid => "INTERVAL_INVALID",
            ViolationCode::IntervalOutsideWindow => "INTERVAL_OUTSIDE_WINDOW",
            ViolationCode::StateSequenceGap => "STATE_SEQUENCE_GAP",
            ViolationCode::StateSequenceOverlap => "STATE_SEQUENCE_OVERLAP",
            ViolationCode::ExtentNonPositive => "EXTENT_NON_POSITIVE",
            ViolationCode::SelfRelation => "SELF_RELATION",
            ViolationCode::NegativeDistance => "NEGATIVE_DISTANCE",
            ViolationCode::UnknownElement => "UNKNOWN_ELEMENT",
            ViolationCode::DuplicateAnnotation => "DUPLICATE_ANNOTATION",
            ViolationCode::DimPartition => "DIM_PARTITION",
            ViolationCode::ConstraintParams => "CONSTRAINT_PARAMS",
            ViolationCode::PeriodNonPositive => "PERIOD_NON_POSITIVE",
            ViolationCode::HorizonInvalid => "HORIZON_INVALID",
            ViolationCode::PredictedTimeOutOfRange => "PREDICTED_TIME_OUT_OF_RANGE",
            ViolationCode::JustificationUnresolved => "JUSTIFICATION_UNRESOLVED",
        }
    }
}

impl core::fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.token())
    }
}

/// One invariant violation located inside the description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Path to the offending item, e.g. `spatial[3].topology`.
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            code,
            path: path.into(),
            message: message.into(),
        }
    }
}

/// The outcome of a validation run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, code: ViolationCode, path: impl Into<String>, msg: impl Into<String>) {
        self.violations.push(Violation::new(code, path, msg));
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

/// Checks the dimension-partition property on a typed description.
///
/// Reading: the payload key sets of the semantic / spatial / temporal schemas
/// are pairwise disjoint, and no annotation instance is registered twice. In
/// the typed model cross-dimension double registration is unrepresentable, so
/// the instance check reduces to snapshot uniqueness per dimension; raw files
/// are additionally screened for foreign keys by the canonical-format loader.
pub fn dimension_partition_check(desc: &ScenarioDescription) -> bool {
    if !schema_keys_disjoint() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for a in &desc.semantic {
        if !seen.insert(("semantic", a.element_id.clone(), a.t.to_bits())) {
            return false;
        }
    }
    for a in &desc.spatial {
        if !seen.insert(("spatial", a.element_id.clone(), a.t.to_bits())) {
            return false;
        }
    }
    true
}

/// Pairwise disjointness of the descriptive payload key sets.
pub fn schema_keys_disjoint() -> bool {
    let sets = [SEMANTIC_KEYS, SPATIAL_KEYS, TEMPORAL_KEYS];
    for (i, a) in sets.iter().enumerate() {
        for b in sets.iter().skip(i + 1) {
            if a.iter().any(|k| b.contains(k)) {
                return false;
            }
        }
    }
    true
}

/// Validates every model invariant of a description. Pure and idempotent.
pub fn validate_description(desc: &ScenarioDescription) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !(desc.window.start < desc.window.end) || desc.window.end != 0.0 {
        report.push(
            ViolationCode::WindowInvalid,
            "window",
            format!(
                "window must be [-T_s, 0] with T_s > 0, got [{}, {}]",
                desc.window.start, desc.window.end
            ),
        );
    }

    validate_context(desc, &mut report);
    validate_modalities(desc, &mut report);

    let known: BTreeSet<&ElementId> = desc.elements.iter().map(|e| &e.id).collect();
    validate_elements(desc, &mut report);
    validate_semantic(desc, &known, &mut report);
    validate_spatial(desc, &known, &mut report);
    validate_temporal(desc, &known, &mut report);
    validate_physical(desc, &known, &mut report);

    if !dimension_partition_check(desc) {
        report.push(
            ViolationCode::DimPartition,
            "annotations",
            "dimension partition check failed: an annotation is registered twice",
        );
    }

    report
}

fn validate_context(desc: &ScenarioDescription, report: &mut ValidationReport) {
    for layer in desc.context.layers.keys() {
        if !(1..=6).contains(layer) {
            report.push(
                ViolationCode::LayerIdRange,
                format!("context.layers.{layer}"),
                format!("layer id {layer} outside 1..=6"),
            );
        }
    }
    let mut rule_ids = BTreeSet::new();
    for (i, rule) in desc.context.rules.iter().enumerate() {
        if !rule_ids.insert(&rule.id) {
            report.push(
                ViolationCode::RuleIdDuplicate,
                format!("context.rules[{i}]"),
                format!("duplicate rule id `{}`", rule.id),
            );
        }
    }
    if let Some(utterances) = &desc.context.driver_channel {
        for (i, w) in utterances.windows(2).enumerate() {
            if w[1].t < w[0].t {
                report.push(
                    ViolationCode::UtteranceOrder,
                    format!("context.driver_channel[{}]", i + 1),
                    "utterance timestamps must be non-decreasing",
                );
            }
        }
    }
}

fn validate_modalities(desc: &ScenarioDescription, report: &mut ValidationReport) {
    for (i, stream) in desc.modalities.iter().enumerate() {
        for (j, w) in stream.samples.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                report.push(
                    ViolationCode::ModalitySampleOrder,
                    format!("modalities[{i}].samples[{}]", j + 1),
                    "modality sample times must be strictly increasing",
                );
            }
        }
    }
}

fn validate_elements(desc: &ScenarioDescription, report: &mut ValidationReport) {
    let mut ids = BTreeSet::new();
    for (i, element) in desc.elements.iter().enumerate() {
        if !ids.insert(&element.id) {
            report.push(
                ViolationCode::DuplicateAnnotation,
                format!("elements[{i}]"),
                format!("duplicate element id `{}`", element.id),
            );
        }
        for (j, w) in element.trajectory.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                report.push(
                    ViolationCode::TrajectoryOrder,
                    format!("elements[{i}].trajectory[{}]", j + 1),
                    "trajectory times must be strictly increasing",
                );
            }
        }
        for (j, sample) in element.trajectory.iter().enumerate() {
            if !sample.orientation.is_rotation(ROTATION_TOL) {
                report.push(
                    ViolationCode::OrientationInvalid,
                    format!("elements[{i}].trajectory[{j}].orientation"),
                    "orientation is not a proper rotation",
                );
            }
        }
    }
}

fn snapshot_checks(
    desc: &ScenarioDescription,
    known: &BTreeSet<&ElementId>,
    element_id: &ElementId,
    t: f64,
    path: &str,
    report: &mut ValidationReport,
) {
    if !known.contains(element_id) {
        report.push(
            ViolationCode::UnknownElement,
            path,
            format!("annotation references unknown element `{element_id}`"),
        );
    }
    if !desc.window.contains(t) {
        report.push(
            ViolationCode::SnapshotOutsideWindow,
            path,
            format!("snapshot time {t} outside window"),
        );
    }
    if let Some(element) = desc.element(element_id) {
        if !element.trajectory.is_empty()
            && !element
                .trajectory
                .iter()
                .any(|s| libm::fabs(s.t - t) <= GRID_TOL)
        {
            report.push(
                ViolationCode::SnapshotOffGrid,
                path,
                format!("snapshot time {t} is not a trajectory sample time"),
            );
        }
    }
}

fn validate_semantic(
    desc: &ScenarioDescription,
    known: &BTreeSet<&ElementId>,
    report: &mut ValidationReport,
) {
    let mut seen = BTreeSet::new();
    for (i, a) in desc.semantic.iter().enumerate() {
        let path = format!("semantic[{i}]");
        snapshot_checks(desc, known, &a.element_id, a.t, &path, report);
        if !seen.insert((&a.element_id, a.t.to_bits())) {
            report.push(
                ViolationCode::DuplicateAnnotation,
                path,
                format!("duplicate semantic snapshot for `{}` at t={}", a.element_id, a.t),
            );
        }
    }
}

fn validate_spatial(
    desc: &ScenarioDescription,
    known: &BTreeSet<&ElementId>,
    report: &mut ValidationReport,
) {
    let mut seen = BTreeSet::new();
    for (i, a) in desc.spatial.iter().enumerate() {
        let path = format!("spatial[{i}]");
        snapshot_checks(desc, known, &a.element_id, a.t, &path, report);
        if !seen.insert((&a.element_id, a.t.to_bits())) {
            report.push(
                ViolationCode::DuplicateAnnotation,
                path.clone(),
                format!("duplicate spatial snapshot for `{}` at t={}", a.element_id, a.t),
            );
        }
        if !a.orientation.is_rotation(ROTATION_TOL) {
            report.push(
                ViolationCode::OrientationInvalid,
                format!("{path}.orientation"),
                "orientation is not a proper rotation",
            );
        }
        if !a.occupancy.is_positive() {
            report.push(
                ViolationCode::ExtentNonPositive,
                format!("{path}.occupancy"),
                "extent components must be positive",
            );
        }
        if a.distance_to_ego < 0.0 {
            report.push(
                ViolationCode::NegativeDistance,
                format!("{path}.distance_to_ego"),
                "distance to ego must be non-negative",
            );
        }
        for (other, _) in &a.topology {
            if other == &a.element_id {
                report.push(
                    ViolationCode::SelfRelation,
                    format!("{path}.topology"),
                    "topology must not relate an element to itself",
                );
            }
            if !known.contains(other) {
                report.push(
                    ViolationCode::UnknownElement,
                    format!("{path}.topology"),
                    format!("topology references unknown element `{other}`"),
                );
            }
        }
    }
}

fn check_sequence_cover(
    intervals: &[TimeInterval],
    cover: Option<&TimeInterval>,
    path: &str,
    report: &mut ValidationReport,
) {
    for (i, w) in intervals.windows(2).enumerate() {
        let gap = w[1].start - w[0].end;
        if gap > GRID_TOL {
            report.push(
                ViolationCode::StateSequenceGap,
                format!("{path}[{}]", i + 1),
                "sequence intervals must be contiguous",
            );
        } else if gap < -GRID_TOL {
            report.push(
                ViolationCode::StateSequenceOverlap,
                format!("{path}[{}]", i + 1),
                "sequence intervals must not overlap",
            );
        }
    }
    if let (Some(cover), Some(first), Some(last)) = (cover, intervals.first(), intervals.last()) {
        if libm::fabs(first.start - cover.start) > GRID_TOL
            || libm::fabs(last.end - cover.end) > GRID_TOL
        {
            report.push(
                ViolationCode::StateSequenceGap,
                String::from(path),
                "sequence must cover the annotation interval",
            );
        }
    }
}

fn validate_temporal(
    desc: &ScenarioDescription,
    known: &BTreeSet<&ElementId>,
    report: &mut ValidationReport,
) {
    let mut seen = BTreeSet::new();
    for (i, a) in desc.temporal.iter().enumerate() {
        let path = format!("temporal[{i}]");
        if !known.contains(&a.element_id) {
            report.push(
                ViolationCode::UnknownElement,
                path.clone(),
                format!("annotation references unknown element `{}`", a.element_id),
            );
        }
        if !seen.insert((&a.element_id, a.interval.start.to_bits(), a.interval.end.to_bits())) {
            report.push(
                ViolationCode::DuplicateAnnotation,
                path.clone(),
                format!("duplicate temporal annotation for `{}`", a.element_id),
            );
        }
        if !a.interval.is_ordered() {
            report.push(
                ViolationCode::IntervalInvalid,
                format!("{path}.interval"),
                "interval start must precede its end",
            );
        }
        if !desc.window.contains_interval(&a.interval) {
            report.push(
                ViolationCode::IntervalOutsideWindow,
                format!("{path}.interval"),
                "interval must lie inside the window",
            );
        }
        let states: Vec<TimeInterval> = a.state_sequence.iter().map(|s| s.interval).collect();
        for (j, s) in a.state_sequence.iter().enumerate() {
            if !s.interval.is_ordered() {
                report.push(
                    ViolationCode::IntervalInvalid,
                    format!("{path}.state_sequence[{j}]"),
                    "state interval start must precede its end",
                );
            }
        }
        check_sequence_cover(
            &states,
            Some(&a.interval),
            &format!("{path}.state_sequence"),
            report,
        );
        let vis: Vec<TimeInterval> = a.visibility_sequence.iter().map(|s| s.interval).collect();
        check_sequence_cover(&vis, None, &format!("{path}.visibility_sequence"), report);
        for intervals in [&vis, &states] {
            for (j, s) in intervals.iter().enumerate() {
                if !desc.window.contains_interval(s) {
                    report.push(
                        ViolationCode::IntervalOutsideWindow,
                        format!("{path}.sequence[{j}]"),
                        "sequence interval must lie inside the window",
                    );
                }
            }
        }
        for (other, _) in &a.orderings {
            if other == &a.element_id {
                report.push(
                    ViolationCode::SelfRelation,
                    format!("{path}.orderings"),
                    "orderings must not relate an element to itself",
                );
            }
            if !known.contains(other) {
                report.push(
                    ViolationCode::UnknownElement,
                    format!("{path}.orderings"),
                    format!("ordering references unknown element `{other}`"),
                );
            }
        }
        if let Some(p) = a.periodicity {
            if p <= 0.0 {
                report.push(
                    ViolationCode::PeriodNonPositive,
                    format!("{path}.periodicity"),
                    "period must be positive",
                );
            }
        }
    }
}

fn validate_physical(
    desc: &ScenarioDescription,
    known: &BTreeSet<&ElementId>,
    report: &mut ValidationReport,
) {
    let mut seen = BTreeSet::new();
    for (i, a) in desc.physical.iter().enumerate() {
        let path = format!("physical[{i}]");
        if !known.contains(&a.element_id) {
            report.push(
                ViolationCode::UnknownElement,
                path.clone(),
                format!("annotation references unknown element `{}`", a.element_id),
            );
        }
        if !seen.insert(&a.element_id) {
            report.push(
                ViolationCode::DuplicateAnnotation,
                path.clone(),
                format!("duplicate physical annotation for `{}`", a.element_id),
            );
        }
        for (j, c) in a.constraint_set.iter().enumerate() {
            if let Some(expected) = c.expected_limit_unit() {
                match c.quantity("limit") {
                    Some(q) if q.unit == expected => {}
                    Some(q) => report.push(
                        ViolationCode::ConstraintParams,
                        format!("{path}.constraint_set[{j}]"),
                        format!(
                            "constraint `{}` limit must carry unit {}, got {}",
                            c.id,
                            expected.token(),
                            q.unit.token()
                        ),
                    ),
                    None => report.push(
                        ViolationCode::ConstraintParams,
                        format!("{path}.constraint_set[{j}]"),
                        format!("constraint `{}` needs a dimensioned `limit` parameter", c.id),
                    ),
                }
            }
            if c.kind == crate::vocab::ConstraintKind::MinGapRss {
                for key in ["rho", "accel_max", "brake_min", "brake_max"] {
                    if let Some(q) = c.quantity(key) {
                        let want = if key == "rho" {
                            Unit::Seconds
                        } else {
                            Unit::MetersPerSecondSquared
                        };
                        if q.unit != want {
                            report.push(
                                ViolationCode::ConstraintParams,
                                format!("{path}.constraint_set[{j}]"),
                                format!("parameter `{key}` must carry unit {}", want.token()),
                            );
                        }
                    }
                }
            }
        }
        for (j, v) in a.violations.iter().enumerate() {
            if !desc.window.contains(v.t) {
                report.push(
                    ViolationCode::IntervalOutsideWindow,
                    format!("{path}.violations[{j}]"),
                    format!("violation time {} outside window", v.t),
                );
            }
        }
    }
}

/// Validates an anticipation against its base description.
pub fn validate_anticipation(
    ant: &ScenarioAnticipation,
    base: &ScenarioDescription,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !(ant.horizon > 0.0) {
        report.push(
            ViolationCode::HorizonInvalid,
            "horizon",
            format!("horizon must be positive, got {}", ant.horizon),
        );
    }
    if ant.base != base.id {
        report.push(
            ViolationCode::Structural,
            "base",
            format!("anticipation base `{}` does not match description `{}`", ant.base, base.id),
        );
    }
    let in_horizon = |t: f64| t > 0.0 && t <= ant.horizon + GRID_TOL;
    for (id, samples) in &ant.predicted_trajectories {
        if base.element(id).is_none() {
            report.push(
                ViolationCode::UnknownElement,
                format!("predicted_trajectories.{id}"),
                "prediction for unknown element",
            );
        }
        for (j, w) in samples.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                report.push(
                    ViolationCode::TrajectoryOrder,
                    format!("predicted_trajectories.{id}[{}]", j + 1),
                    "predicted times must be strictly increasing",
                );
            }
        }
        for (j, s) in samples.iter().enumerate() {
            if !in_horizon(s.t) {
                report.push(
                    ViolationCode::PredictedTimeOutOfRange,
                    format!("predicted_trajectories.{id}[{j}]"),
                    format!("predicted time {} outside (0, {}]", s.t, ant.horizon),
                );
            }
        }
    }
    for (i, e) in ant.predicted_events.iter().enumerate() {
        if !in_horizon(e.t) {
            report.push(
                ViolationCode::PredictedTimeOutOfRange,
                format!("predicted_events[{i}]"),
                format!("event time {} outside (0, {}]", e.t, ant.horizon),
            );
        }
    }
    for (i, d) in ant.predicted_relations.iter().enumerate() {
        if !in_horizon(d.t) {
            report.push(
                ViolationCode::PredictedTimeOutOfRange,
                format!("predicted_relations[{i}]"),
                format!("delta time {} outside (0, {}]", d.t, ant.horizon),
            );
        }
    }
    report
}

/// Checks that every justification of an action resolves inside the scenario.
pub fn validate_action(
    action: &super::Action,
    desc: &ScenarioDescription,
    ant: Option<&ScenarioAnticipation>,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, j) in action.justification.iter().enumerate() {
        let resolved = match j {
            super::AnnotationRef::Semantic { element_id, t } => {
                desc.semantic_for(element_id, *t).is_some()
            }
            super::AnnotationRef::Spatial { element_id, t } => {
                desc.spatial_for(element_id, *t).is_some()
            }
            super::AnnotationRef::Temporal { element_id } => {
                desc.temporal_for(element_id).is_some()
            }
            super::AnnotationRef::Physical { element_id } => {
                desc.physical_for(element_id).is_some()
            }
            super::AnnotationRef::Event { kind, t } => ant
                .map(|a| {
                    a.predicted_events
                        .iter()
                        .any(|e| &e.kind == kind && e.t == *t)
                })
                .unwrap_or(false),
        };
        if !resolved {
            report.push(
                ViolationCode::JustificationUnresolved,
                format!("justification[{i}]"),
                format!("reference `{j}` does not resolve"),
            );
        }
    }
    report
}

// Compile-time style guard: keep the key tables and the struct fields in sync.
#[allow(dead_code)]
fn _schema_key_tables_match_model(a: &super::SemanticAnnotation, b: &super::SpatialAnnotation) {
    let _ = (&a.class, &a.attributes, &a.state, &a.affordances);
    let _ = (
        &b.position,
        &b.orientation,
        &b.distance_to_ego,
        &b.occupancy,
        &b.topology,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Element, ScenarioDescription};

    fn empty_desc() -> ScenarioDescription {
        ScenarioDescription::empty("t", TimeInterval::new(-6.0, 0.0), ElementId::from("ego"))
    }

    #[test]
    fn empty_description_is_valid() {
        let report = validate_description(&empty_desc());
        assert!(report.is_empty(), "unexpected: {:?}", report.violations);
    }

    #[test]
    fn validator_is_idempotent() {
        let desc = empty_desc();
        assert_eq!(validate_description(&desc), validate_description(&desc));
    }

    #[test]
    fn window_must_end_at_present() {
        let mut desc = empty_desc();
        desc.window = TimeInterval::new(-6.0, 1.0);
        let report = validate_description(&desc);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == ViolationCode::WindowInvalid));
    }

    #[test]
    fn schema_tables_are_disjoint() {
        assert!(schema_keys_disjoint());
    }

    #[test]
    fn duplicate_snapshot_fails_partition_check() {
        let mut desc = empty_desc();
        desc.elements.push(Element::new("a"));
        let ann = crate::model::SemanticAnnotation {
            element_id: ElementId::from("a"),
            t: 0.0,
            class: crate::vocab::ElementClass::Vehicle,
            attributes: alloc::vec::Vec::new(),
            state: crate::vocab::MotionState::Moving,
            affordances: alloc::vec::Vec::new(),
        };
        desc.semantic.push(ann.clone());
        desc.semantic.push(ann);
        assert!(!dimension_partition_check(&desc));
        let report = validate_description(&desc);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == ViolationCode::DimPartition));
    }
}
