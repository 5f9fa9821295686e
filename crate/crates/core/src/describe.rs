//! The description pipeline: raw element trajectories plus scene metadata in,
//! a fully annotated ground-truth description out.
//!
//! Semantic and spatial snapshots are emitted at the union of the trajectory
//! sample times; temporal and physical annotations cover each element's span
//! inside the window. Everything downstream (prediction, scoring, fixtures)
//! consumes the output of this function, so it is the single place where the
//! derivation conventions live.

use crate::geometry::{derive_topology, occlusion_state, surface_distance, SnapshotElement};
use crate::math::Vec2;
use crate::model::{
    Constraint, Context, Element, ElementId, Extent, ModalitySample, ModalityStream,
    PhysicalAnnotation, ScenarioDescription, SemanticAnnotation, SpatialAnnotation,
    TemporalAnnotation, TimeInterval, ViolationRecord, VisibilityInterval,
};
use crate::params::EngineParams;
use crate::physics::{assign_model, check_constraints, VerdictStatus};
use crate::temporal::{
    classify_state, derive_accelerations, derive_velocities, detect_periodicity,
    extract_state_sequence, order_relation,
};
use crate::vocab::{Affordance, ElementClass, ModalityKind, MotionState, Visibility};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescribeError {
    #[error("window must be [-T_s, 0] with T_s > 0, got [{0}, {1}]")]
    BadWindow(f64, f64),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Perception-side metadata for one element: everything the trajectory alone
/// cannot tell us.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ElementMeta {
    pub class: ElementClass,
    #[serde(default)]
    pub attributes: Vec<String>,
    /// `None` falls back to the class defaults.
    #[serde(default)]
    pub affordances: Option<Vec<Affordance>>,
    #[serde(default)]
    pub material_tags: Vec<String>,
    pub extent: Extent,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

impl ElementMeta {
    pub fn new(class: ElementClass) -> Self {
        let extent = default_extent(&class);
        ElementMeta {
            class,
            attributes: Vec::new(),
            affordances: None,
            material_tags: Vec::new(),
            extent,
            constraints: Vec::new(),
        }
    }

    pub fn with_extent(mut self, length: f64, width: f64, height: f64) -> Self {
        self.extent = Extent::new(length, width, height);
        self
    }

    pub fn with_attribute(mut self, attribute: impl Into<String>) -> Self {
        self.attributes.push(attribute.into());
        self
    }

    pub fn with_affordances(mut self, affordances: Vec<Affordance>) -> Self {
        self.affordances = Some(affordances);
        self
    }

    pub fn with_material(mut self, tag: impl Into<String>) -> Self {
        self.material_tags.push(tag.into());
        self
    }

    pub fn with_constraint(mut self, constraint: Constraint) -> Self {
        self.constraints.push(constraint);
        self
    }

    fn effective_affordances(&self) -> Vec<Affordance> {
        self.affordances
            .clone()
            .unwrap_or_else(|| default_affordances(&self.class))
    }
}

pub fn default_extent(class: &ElementClass) -> Extent {
    match class {
        ElementClass::Pedestrian => Extent::new(0.5, 0.5, 1.8),
        ElementClass::Cyclist => Extent::new(1.8, 0.6, 1.8),
        ElementClass::PublicTransport => Extent::new(12.0, 2.5, 3.2),
        ElementClass::StaticObject => Extent::new(0.5, 0.5, 0.5),
        ElementClass::Infrastructure => Extent::new(1.0, 1.0, 3.0),
        _ => Extent::new(4.5, 1.8, 1.5),
    }
}

pub fn default_affordances(class: &ElementClass) -> Vec<Affordance> {
    match class {
        ElementClass::Pedestrian => alloc::vec![
            Affordance::CanSignal,
            Affordance::CanEnterVehicle,
            Affordance::CanCross,
        ],
        ElementClass::Cyclist => alloc::vec![Affordance::CanCross],
        ElementClass::Vehicle | ElementClass::PublicTransport => {
            alloc::vec![Affordance::CanOcclude]
        }
        ElementClass::Infrastructure => alloc::vec![Affordance::CanOcclude],
        _ => Vec::new(),
    }
}

/// Inputs of the description pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct DeriveInput {
    pub scenario_id: String,
    pub window: TimeInterval,
    pub context: Context,
    pub modalities: Vec<ModalityStream>,
    pub elements: Vec<Element>,
    pub meta: BTreeMap<ElementId, ElementMeta>,
    pub ego_id: ElementId,
}

/// Runs the full derivation over the input window.
pub fn derive_description(
    input: &DeriveInput,
    params: &EngineParams,
) -> Result<ScenarioDescription, DescribeError> {
    if !(input.window.start < input.window.end) || input.window.end != 0.0 {
        return Err(DescribeError::BadWindow(
            input.window.start,
            input.window.end,
        ));
    }

    // Clip trajectories to the window and sort elements canonically.
    let mut elements: Vec<Element> = input
        .elements
        .iter()
        .map(|e| Element {
            id: e.id.clone(),
            trajectory: e
                .trajectory
                .iter()
                .filter(|s| input.window.contains(s.t))
                .cloned()
                .collect(),
        })
        .collect();
    elements.sort_by(|a, b| a.id.cmp(&b.id));

    let meta_of = |id: &ElementId| -> ElementMeta {
        input
            .meta
            .get(id)
            .cloned()
            .unwrap_or_else(|| ElementMeta::new(ElementClass::Vehicle))
    };

    // Union snapshot grid over all sample times.
    let mut grid: Vec<f64> = elements
        .iter()
        .flat_map(|e| e.trajectory.iter().map(|s| s.t))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| libm::fabs(*a - *b) <= 1e-9);

    let priority_holders: Vec<ElementId> = input
        .context
        .priority_rules()
        .map(|(_, holder)| ElementId::from(holder))
        .collect();
    let still = params.temporal.still_speed;
    let holder_moving_at = |subject: &ElementId, t: f64| -> bool {
        priority_holders.iter().any(|h| {
            h != subject
                && elements
                    .iter()
                    .find(|e| &e.id == h)
                    .and_then(|e| e.speed_at(t))
                    .map(|v| v >= still)
                    .unwrap_or(false)
        })
    };

    let mut desc = ScenarioDescription::empty(
        input.scenario_id.clone(),
        input.window,
        input.ego_id.clone(),
    );
    desc.context = input.context.clone();
    desc.modalities = input.modalities.clone();
    attach_driver_channel_stream(&mut desc);

    // Per-element visibility verdicts along the grid, for the temporal pass.
    let mut visibility_runs: BTreeMap<ElementId, Vec<(f64, Visibility)>> = BTreeMap::new();

    for &t in &grid {
        let snapshot: Vec<SnapshotElement> = elements
            .iter()
            .filter_map(|e| SnapshotElement::of(e, &meta_of(&e.id).extent, t))
            .collect();
        if snapshot.is_empty() {
            continue;
        }
        let topology = derive_topology(&snapshot, &input.ego_id, &params.geometry)?;
        let ego = snapshot.iter().find(|e| e.id == input.ego_id);

        for snap in &snapshot {
            let meta = meta_of(&snap.id);
            let element = elements
                .iter()
                .find(|e| e.id == snap.id)
                .expect("snapshot element exists");
            let state = classify_state(
                element,
                &meta.class,
                t,
                holder_moving_at(&snap.id, t),
                &params.temporal,
            )
            .expect("grid time lies in span");

            desc.semantic.push(SemanticAnnotation {
                element_id: snap.id.clone(),
                t,
                class: meta.class.clone(),
                attributes: meta.attributes.clone(),
                state,
                affordances: meta.effective_affordances(),
            });

            let distance_to_ego = match ego {
                Some(ego_snap) if ego_snap.id != snap.id => {
                    surface_distance(&ego_snap.element_box(), &snap.element_box())
                }
                _ => 0.0,
            };
            desc.spatial.push(SpatialAnnotation {
                element_id: snap.id.clone(),
                t,
                position: snap.position,
                orientation: snap.orientation,
                distance_to_ego,
                occupancy: meta.extent,
                topology: topology.get(&snap.id).cloned().unwrap_or_default(),
            });

            if let Some(ego_snap) = ego {
                if ego_snap.id != snap.id {
                    let ego_xy = Vec2::new(ego_snap.position.x(), ego_snap.position.y());
                    let occluders: Vec<_> = snapshot
                        .iter()
                        .filter(|o| o.id != snap.id && o.id != input.ego_id)
                        .map(|o| o.footprint())
                        .collect();
                    if let Ok((verdict, _)) =
                        occlusion_state(&ego_xy, &snap.footprint(), &occluders)
                    {
                        visibility_runs
                            .entry(snap.id.clone())
                            .or_default()
                            .push((t, verdict));
                    }
                }
            }
        }
    }

    // Temporal and physical annotations per element.
    let spans: Vec<(ElementId, TimeInterval)> = elements
        .iter()
        .filter_map(|e| e.span().map(|s| (e.id.clone(), s)))
        .collect();
    for element in &elements {
        let Some(span) = element.span() else { continue };
        if element.trajectory.len() < 2 {
            continue;
        }
        let meta = meta_of(&element.id);
        let velocity_samples = derive_velocities(&element.trajectory);
        let acceleration_samples = derive_accelerations(&velocity_samples);
        let state_sequence = extract_state_sequence(element, &meta.class, &params.temporal, |t| {
            holder_moving_at(&element.id, t)
        });
        let visibility_sequence = merge_visibility_runs(
            visibility_runs.get(&element.id).map(Vec::as_slice).unwrap_or(&[]),
        );
        let orderings = spans
            .iter()
            .filter(|(id, _)| id != &element.id)
            .map(|(id, other)| {
                (
                    id.clone(),
                    order_relation(&span, other, params.temporal.order_eps),
                )
            })
            .collect();
        let periodicity = detect_periodicity(&state_sequence, &params.temporal);
        desc.temporal.push(TemporalAnnotation {
            element_id: element.id.clone(),
            interval: span,
            velocity_samples,
            acceleration_samples,
            state_sequence,
            visibility_sequence,
            orderings,
            periodicity,
        });

        let end_state = classify_state(
            element,
            &meta.class,
            span.end,
            holder_moving_at(&element.id, span.end),
            &params.temporal,
        )
        .expect("span end lies in span");
        let model = assign_model(element, &meta.class, &end_state, params);
        desc.physical.push(PhysicalAnnotation {
            element_id: element.id.clone(),
            model: model.kind,
            material_tags: meta.material_tags.clone(),
            constraint_set: meta.constraints.clone(),
            violations: Vec::new(),
        });
    }

    desc.elements = elements;

    // Record constraint violations back onto the physical annotations.
    let verdicts = check_constraints(&desc, params);
    for verdict in verdicts {
        if verdict.status != VerdictStatus::Violated {
            continue;
        }
        let (Some(element), Some(t), Some(measured)) = (
            verdict.worst_element.clone(),
            verdict.worst_t,
            verdict.worst_measured,
        ) else {
            continue;
        };
        if let Some(ann) = desc
            .physical
            .iter_mut()
            .find(|a| a.element_id == element)
        {
            ann.violations.push(ViolationRecord {
                constraint_id: verdict.constraint_id.clone(),
                t,
                measured,
            });
        }
    }

    desc.semantic.sort_by(|a, b| {
        (&a.element_id, a.t)
            .partial_cmp(&(&b.element_id, b.t))
            .expect("finite times")
    });
    desc.spatial.sort_by(|a, b| {
        (&a.element_id, a.t)
            .partial_cmp(&(&b.element_id, b.t))
            .expect("finite times")
    });

    Ok(desc)
}

/// Mirrors driver utterances into a linguistic modality stream, unless the
/// input already declares one. Equal-time utterances merge into one sample.
fn attach_driver_channel_stream(desc: &mut ScenarioDescription) {
    let Some(utterances) = &desc.context.driver_channel else {
        return;
    };
    if desc
        .modalities
        .iter()
        .any(|m| m.kind == ModalityKind::Linguistic)
    {
        return;
    }
    let mut samples: Vec<ModalitySample> = Vec::new();
    for u in utterances {
        match samples.last_mut() {
            Some(last) if last.t == u.t => {
                last.payload.push_str("; ");
                last.payload.push_str(&u.text);
            }
            _ => samples.push(ModalitySample {
                t: u.t,
                payload: u.text.clone(),
            }),
        }
    }
    desc.modalities.push(ModalityStream {
        kind: ModalityKind::Linguistic,
        source: String::from("driver_channel"),
        samples,
    });
}

/// Merges per-snapshot visibility verdicts into maximal runs. Runs that are
/// not fully visible are induced by occluders, hence marked passive.
fn merge_visibility_runs(samples: &[(f64, Visibility)]) -> Vec<VisibilityInterval> {
    if samples.len() < 2 {
        return Vec::new();
    }
    let mut starts: Vec<(Visibility, f64)> = Vec::new();
    for (t, v) in samples {
        if starts.last().map(|(s, _)| s) != Some(v) {
            starts.push((v.clone(), *t));
        }
    }
    let end = samples.last().expect("non-empty").0;
    let mut runs = Vec::new();
    for (i, (visibility, start)) in starts.iter().enumerate() {
        let stop = starts.get(i + 1).map(|(_, s)| *s).unwrap_or(end);
        let interval = TimeInterval::new(*start, stop);
        if interval.is_ordered() {
            runs.push(VisibilityInterval {
                passive: *visibility != Visibility::Visible,
                visibility: visibility.clone(),
                interval,
            });
        }
    }
    runs
}

/// Convenience: the motion states a derived description assigns at a time.
pub fn state_at(
    desc: &ScenarioDescription,
    id: &ElementId,
    t: f64,
) -> Option<MotionState> {
    desc.semantic_for(id, t).map(|a| a.state.clone())
}
