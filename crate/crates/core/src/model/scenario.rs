//! Scenario-level containers: description, anticipation, tasks and actions.

use super::annotation::{
    PhysicalAnnotation, SemanticAnnotation, SpatialAnnotation, TemporalAnnotation,
};
use super::context::{Context, ParamValue};
use super::element::{Element, StateSample};
use super::{ElementId, TimeInterval};
use crate::vocab::{ActionVerb, EventKind, ModalityKind, SpatialRelation, TaskKind};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// One reference into a modality stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalitySample {
    pub t: f64,
    pub payload: String,
}

/// Metadata of one sensor stream. Signal processing is out of scope; samples
/// are opaque payload references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityStream {
    pub kind: ModalityKind,
    pub source: String,
    #[serde(default)]
    pub samples: Vec<ModalitySample>,
}

/// A described scenario over the past window `[-T_s, 0]`.
///
/// Field order is the normative key order of the canonical scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDescription {
    pub id: String,
    pub window: TimeInterval,
    #[serde(default)]
    pub context: Context,
    #[serde(default)]
    pub modalities: Vec<ModalityStream>,
    #[serde(default)]
    pub elements: Vec<Element>,
    #[serde(default)]
    pub semantic: Vec<SemanticAnnotation>,
    #[serde(default)]
    pub spatial: Vec<SpatialAnnotation>,
    #[serde(default)]
    pub temporal: Vec<TemporalAnnotation>,
    #[serde(default)]
    pub physical: Vec<PhysicalAnnotation>,
    pub ego_id: ElementId,
}

impl ScenarioDescription {
    pub fn empty(id: impl Into<String>, window: TimeInterval, ego_id: ElementId) -> Self {
        ScenarioDescription {
            id: id.into(),
            window,
            context: Context::default(),
            modalities: Vec::new(),
            elements: Vec::new(),
            semantic: Vec::new(),
            spatial: Vec::new(),
            temporal: Vec::new(),
            physical: Vec::new(),
            ego_id,
        }
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        self.elements.iter().find(|e| &e.id == id)
    }

    pub fn semantic_for(&self, id: &ElementId, t: f64) -> Option<&SemanticAnnotation> {
        self.semantic
            .iter()
            .find(|a| &a.element_id == id && a.t == t)
    }

    pub fn spatial_for(&self, id: &ElementId, t: f64) -> Option<&SpatialAnnotation> {
        self.spatial
            .iter()
            .find(|a| &a.element_id == id && a.t == t)
    }

    pub fn temporal_for(&self, id: &ElementId) -> Option<&TemporalAnnotation> {
        self.temporal.iter().find(|a| &a.element_id == id)
    }

    pub fn physical_for(&self, id: &ElementId) -> Option<&PhysicalAnnotation> {
        self.physical.iter().find(|a| &a.element_id == id)
    }

    /// Latest class stated for an element, from its most recent semantic snapshot.
    pub fn class_of(&self, id: &ElementId) -> Option<&crate::vocab::ElementClass> {
        self.semantic
            .iter()
            .filter(|a| &a.element_id == id)
            .max_by(|a, b| a.t.total_cmp(&b.t))
            .map(|a| &a.class)
    }
}

/// Predicted happenings beyond the relation deltas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedEvent {
    pub t: f64,
    pub kind: EventKind,
    pub elements: Vec<ElementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Direction of a topology change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaChange {
    Added,
    Removed,
}

/// A timestamped topology change on one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDelta {
    pub t: f64,
    pub element_id: ElementId,
    pub other: ElementId,
    pub relation: SpatialRelation,
    pub change: DeltaChange,
}

/// Anticipated future of a described scenario over `(0, T_e]`. It extends the
/// description append-only: nothing before the present is restated or revised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAnticipation {
    /// Id of the description this anticipation extends.
    pub base: String,
    /// Horizon `T_e` in seconds.
    pub horizon: f64,
    /// Prediction step in seconds.
    pub dt: f64,
    #[serde(default)]
    pub predicted_trajectories: BTreeMap<ElementId, Vec<StateSample>>,
    #[serde(default)]
    pub predicted_events: Vec<PredictedEvent>,
    #[serde(default)]
    pub predicted_relations: Vec<TopologyDelta>,
}

impl ScenarioAnticipation {
    pub fn empty(base: impl Into<String>, horizon: f64, dt: f64) -> Self {
        ScenarioAnticipation {
            base: base.into(),
            horizon,
            dt,
            predicted_trajectories: BTreeMap::new(),
            predicted_events: Vec::new(),
            predicted_relations: Vec::new(),
        }
    }
}

/// A task given to the understanding agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl TaskSpec {
    pub fn new(kind: TaskKind) -> Self {
        TaskSpec {
            kind,
            params: BTreeMap::new(),
        }
    }
}

/// Reference to the annotation or event justifying an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dim", rename_all = "snake_case")]
pub enum AnnotationRef {
    Semantic { element_id: ElementId, t: f64 },
    Spatial { element_id: ElementId, t: f64 },
    Temporal { element_id: ElementId },
    Physical { element_id: ElementId },
    Event { kind: EventKind, t: f64 },
}

impl core::fmt::Display for AnnotationRef {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnnotationRef::Semantic { element_id, t } => {
                write!(f, "semantic {element_id} @ t={t}")
            }
            AnnotationRef::Spatial { element_id, t } => write!(f, "spatial {element_id} @ t={t}"),
            AnnotationRef::Temporal { element_id } => write!(f, "temporal {element_id}"),
            AnnotationRef::Physical { element_id } => write!(f, "physical {element_id}"),
            AnnotationRef::Event { kind, t } => write!(f, "event {} @ t={t}", kind.token()),
        }
    }
}

/// The outcome of a task decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub verb: ActionVerb,
    #[serde(default)]
    pub justification: Vec<AnnotationRef>,
}
