//! Per-dimension annotations.
//!
//! Semantic and spatial annotations are snapshots at discrete times; temporal
//! and physical annotations cover intervals. The payload key sets of the three
//! descriptive dimensions are pairwise disjoint by construction (see
//! `validate::schema_keys`).

use super::{ElementId, TimeInterval};
use crate::math::{Mat3, Vec3};
use crate::model::context::ParamValue;
use crate::vocab::{
    Affordance, ConstraintKind, ElementClass, MotionState, Quantity, SpatialRelation, Unit,
    Visibility,
};
use crate::vocab::IntervalOrder;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// What an element is at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticAnnotation {
    pub element_id: ElementId,
    pub t: f64,
    pub class: ElementClass,
    #[serde(default)]
    pub attributes: Vec<String>,
    pub state: MotionState,
    #[serde(default)]
    pub affordances: Vec<Affordance>,
}

/// Bounding-volume extent (length, width, height) in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64, f64)", into = "(f64, f64, f64)")]
pub struct Extent {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Extent {
    pub fn new(length: f64, width: f64, height: f64) -> Self {
        Extent {
            length,
            width,
            height,
        }
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    pub fn is_positive(&self) -> bool {
        self.length > 0.0 && self.width > 0.0 && self.height > 0.0
    }
}

impl From<(f64, f64, f64)> for Extent {
    fn from((l, w, h): (f64, f64, f64)) -> Self {
        Extent::new(l, w, h)
    }
}

impl From<Extent> for (f64, f64, f64) {
    fn from(e: Extent) -> Self {
        (e.length, e.width, e.height)
    }
}

/// Where an element is at one instant, including its relations to others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialAnnotation {
    pub element_id: ElementId,
    pub t: f64,
    pub position: Vec3,
    pub orientation: Mat3,
    pub distance_to_ego: f64,
    pub occupancy: Extent,
    /// Pairs (other element, relation of *this* element w.r.t. the other).
    #[serde(default)]
    pub topology: BTreeSet<(ElementId, SpatialRelation)>,
}

/// Maximal run of one motion state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateInterval {
    pub state: MotionState,
    pub interval: TimeInterval,
}

/// Maximal run of one visibility verdict from the ego viewpoint. `passive`
/// marks runs induced by other elements (an occluder) rather than own motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityInterval {
    pub visibility: Visibility,
    pub interval: TimeInterval,
    #[serde(default)]
    pub passive: bool,
}

/// How an element evolves over its interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalAnnotation {
    pub element_id: ElementId,
    pub interval: TimeInterval,
    #[serde(default)]
    pub velocity_samples: Vec<(f64, Vec3)>,
    #[serde(default)]
    pub acceleration_samples: Vec<(f64, Vec3)>,
    #[serde(default)]
    pub state_sequence: Vec<StateInterval>,
    #[serde(default)]
    pub visibility_sequence: Vec<VisibilityInterval>,
    /// Pairs (other element, ordering of *this* element's interval w.r.t. the other's).
    #[serde(default)]
    pub orderings: BTreeSet<(ElementId, IntervalOrder)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodicity: Option<f64>,
}

/// A checkable constraint. Parameters are dimensionally tagged quantities;
/// see docs/schema.md for the per-kind parameter conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub id: String,
    pub kind: ConstraintKind,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl Constraint {
    pub fn new(id: impl Into<String>, kind: ConstraintKind) -> Self {
        Constraint {
            id: id.into(),
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn with_quantity(mut self, key: &str, value: f64, unit: Unit) -> Self {
        self.params.insert(
            String::from(key),
            ParamValue::Quantity(Quantity::new(value, unit)),
        );
        self
    }

    pub fn with_text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.params
            .insert(String::from(key), ParamValue::Text(value.into()));
        self
    }

    pub fn quantity(&self, key: &str) -> Option<&Quantity> {
        self.params.get(key).and_then(ParamValue::as_quantity)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.params.get(key).and_then(ParamValue::as_text)
    }

    /// The unit its `limit` parameter must carry, when the kind demands one.
    pub fn expected_limit_unit(&self) -> Option<Unit> {
        match self.kind {
            ConstraintKind::MaxSpeed => Some(Unit::MetersPerSecond),
            ConstraintKind::MaxAccel => Some(Unit::MetersPerSecondSquared),
            ConstraintKind::MinGapRss | ConstraintKind::TrafficRule => None,
        }
    }
}

/// A recorded constraint violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub constraint_id: String,
    pub t: f64,
    pub measured: f64,
}

/// The physical annotation: assigned motion model, material tags, constraints
/// and recorded violations. It has no snapshot time; it covers the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalAnnotation {
    pub element_id: ElementId,
    pub model: crate::vocab::ModelKind,
    #[serde(default)]
    pub material_tags: Vec<String>,
    #[serde(default)]
    pub constraint_set: Vec<Constraint>,
    #[serde(default)]
    pub violations: Vec<ViolationRecord>,
}
