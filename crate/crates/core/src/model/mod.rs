//! The typed scenario model: context, elements, per-dimension annotations and
//! the description / anticipation containers built from them.

mod annotation;
mod context;
mod element;
mod scenario;
pub mod validate;

pub use annotation::{
    Constraint, Extent, PhysicalAnnotation, SemanticAnnotation, SpatialAnnotation, StateInterval,
    TemporalAnnotation, ViolationRecord, VisibilityInterval,
};
pub use context::{Context, LayerEntry, ParamValue, Rule, Utterance};
pub use element::{Element, StateSample};
pub use scenario::{
    Action, AnnotationRef, DeltaChange, ModalitySample, ModalityStream, PredictedEvent,
    ScenarioAnticipation, ScenarioDescription, TaskSpec, TopologyDelta,
};

use alloc::string::String;
use serde::{Deserialize, Serialize};

/// Identifier of a scenario element.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ElementId(pub String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        ElementId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId(String::from(s))
    }
}

impl core::fmt::Display for ElementId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A closed time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Self {
        TimeInterval { start, end }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    pub fn contains_interval(&self, other: &TimeInterval) -> bool {
        other.start >= self.start && other.end <= self.end
    }

    pub fn is_ordered(&self) -> bool {
        self.start < self.end
    }
}

impl From<(f64, f64)> for TimeInterval {
    fn from((start, end): (f64, f64)) -> Self {
        TimeInterval { start, end }
    }
}

impl From<TimeInterval> for (f64, f64) {
    fn from(i: TimeInterval) -> Self {
        (i.start, i.end)
    }
}
