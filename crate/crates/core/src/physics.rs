//! Motion models, constraint checking and scenario anticipation.
//!
//! Predictions step accumulatively (`p += v·dt`), so re-running a prediction
//! from its own endpoint continues the identical float chain: the semigroup
//! property holds bitwise for the static and constant-velocity models and to
//! second order for constant acceleration.

use crate::geometry::{
    classify_directional_relation, derive_topology, occlusion_state, surface_distance, ElementBox,
    Footprint, GeometryError, SnapshotElement,
};
use crate::math::{Mat3, Vec2, Vec3};
use crate::model::{
    Constraint, DeltaChange, Element, ElementId, Extent, PredictedEvent, Rule,
    ScenarioAnticipation, ScenarioDescription, StateSample, TopologyDelta,
};
use crate::params::{EngineParams, RssParams};
use crate::temporal;
use crate::vocab::{
    ConstraintKind, ElementClass, EventKind, ModelKind, MotionState, SpatialRelation, Visibility,
};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error("element has no state to predict from")]
    NoState,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A motion model assigned to one element for prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub kind: ModelKind,
    /// Wheelbase in metres; required by the bicycle model.
    pub wheelbase: Option<f64>,
}

impl MotionModel {
    pub fn of_kind(kind: ModelKind) -> Self {
        MotionModel {
            kind,
            wheelbase: None,
        }
    }

    pub fn bicycle(wheelbase: f64) -> Self {
        MotionModel {
            kind: ModelKind::KinematicBicycle,
            wheelbase: Some(wheelbase),
        }
    }
}

/// Deterministic model assignment: parked elements hold still, pedestrians
/// extrapolate their velocity, turning drivers get the bicycle model.
pub fn assign_model(
    element: &Element,
    class: &ElementClass,
    current_state: &MotionState,
    params: &EngineParams,
) -> MotionModel {
    if *current_state == MotionState::Parked {
        return MotionModel::of_kind(ModelKind::Static);
    }
    match class {
        ElementClass::Pedestrian => MotionModel::of_kind(ModelKind::ConstantVelocity),
        ElementClass::StaticObject | ElementClass::Infrastructure => {
            let speed = element.last_state().map(|s| s.speed).unwrap_or(0.0);
            if speed < params.temporal.still_speed {
                MotionModel::of_kind(ModelKind::Static)
            } else {
                MotionModel::of_kind(ModelKind::ConstantVelocity)
            }
        }
        _ => {
            let last = element.last_state();
            let turning = last
                .and_then(|s| s.yaw_rate)
                .map(|w| libm::fabs(w) > params.physics.turning_yaw_rate)
                .unwrap_or(false);
            let moving = last.map(|s| s.speed > 1e-9).unwrap_or(false);
            if turning && moving {
                MotionModel::bicycle(params.physics.wheelbase(class))
            } else {
                MotionModel::of_kind(ModelKind::ConstantVelocity)
            }
        }
    }
}

/// A predicted trajectory plus a flag marking model fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub samples: Vec<StateSample>,
    /// Set when the requested model lacked the data it needs and the
    /// constant-velocity model was used instead.
    pub fell_back: bool,
}

/// Predicts future samples at `last.t + dt, …, last.t + horizon`.
pub fn predict(
    element: &Element,
    model: &MotionModel,
    horizon: f64,
    dt: f64,
) -> Result<Prediction, PhysicsError> {
    if !(horizon > 0.0) {
        return Err(PhysicsError::BadHorizon(horizon));
    }
    if !(dt > 0.0) {
        return Err(PhysicsError::BadStep(dt));
    }
    let last = element.last_state().ok_or(PhysicsError::NoState)?;
    let steps = libm::floor(horizon / dt + 1e-9) as usize;

    match model.kind {
        ModelKind::Static => Ok(Prediction {
            samples: hold_pose(last, steps, dt),
            fell_back: false,
        }),
        ModelKind::ConstantVelocity => Ok(Prediction {
            samples: constant_velocity(last, steps, dt),
            fell_back: false,
        }),
        ModelKind::ConstantAcceleration => {
            Ok(constant_acceleration(&element.trajectory, steps, dt))
        }
        ModelKind::KinematicBicycle => {
            let wheelbase = model.wheelbase.unwrap_or(2.8);
            match (last.yaw_rate, last.speed) {
                (Some(w), v) if v > 1e-9 && libm::fabs(w) > 1e-12 => Ok(Prediction {
                    samples: bicycle_rk4(last, wheelbase, w, steps, dt),
                    fell_back: false,
                }),
                _ => Ok(Prediction {
                    samples: constant_velocity(last, steps, dt),
                    fell_back: true,
                }),
            }
        }
        // Descriptive kinds carry no integrator; extrapolate conservatively.
        _ => Ok(Prediction {
            samples: constant_velocity(last, steps, dt),
            fell_back: true,
        }),
    }
}

fn hold_pose(last: &StateSample, steps: usize, dt: f64) -> Vec<StateSample> {
    (1..=steps)
        .map(|k| StateSample {
            t: last.t + k as f64 * dt,
            position: last.position,
            orientation: last.orientation,
            speed: 0.0,
            yaw_rate: None,
        })
        .collect()
}

fn constant_velocity(last: &StateSample, steps: usize, dt: f64) -> Vec<StateSample> {
    // Velocity = speed × forward axis, so a restart from the endpoint sample
    // reconstructs the identical vector.
    let v = last.orientation.forward().scale(last.speed);
    let step = v.scale(dt);
    let mut samples = Vec::with_capacity(steps);
    let mut p = last.position;
    for k in 1..=steps {
        p = p.add(&step);
        samples.push(StateSample {
            t: last.t + k as f64 * dt,
            position: p,
            orientation: last.orientation,
            speed: last.speed,
            yaw_rate: None,
        });
    }
    samples
}

/// Quadratic-fit endpoint derivatives through the last three samples; exact
/// for genuinely constant acceleration.
fn endpoint_kinematics(trajectory: &[StateSample]) -> (Vec3, Vec3) {
    let n = trajectory.len();
    let last = &trajectory[n - 1];
    if n < 2 {
        return (last.orientation.forward().scale(last.speed), Vec3::ZERO);
    }
    if n < 3 {
        let prev = &trajectory[n - 2];
        let h = last.t - prev.t;
        return (last.position.sub(&prev.position).scale(1.0 / h), Vec3::ZERO);
    }
    let (p0, p1, p2) = (
        &trajectory[n - 3],
        &trajectory[n - 2],
        &trajectory[n - 1],
    );
    let h1 = p1.t - p0.t;
    let h2 = p2.t - p1.t;
    let c0 = h2 / (h1 * (h1 + h2));
    let c1 = -(h1 + h2) / (h1 * h2);
    let c2 = (h1 + 2.0 * h2) / (h2 * (h1 + h2));
    let v = p0
        .position
        .scale(c0)
        .add(&p1.position.scale(c1))
        .add(&p2.position.scale(c2));
    let a0 = 2.0 / (h1 * (h1 + h2));
    let a1 = -2.0 / (h1 * h2);
    let a2 = 2.0 / (h2 * (h1 + h2));
    let a = p0
        .position
        .scale(a0)
        .add(&p1.position.scale(a1))
        .add(&p2.position.scale(a2));
    (v, a)
}

fn constant_acceleration(trajectory: &[StateSample], steps: usize, dt: f64) -> Prediction {
    let last = trajectory.last().expect("caller checked");
    let (mut v, a) = endpoint_kinematics(trajectory);
    let mut samples = Vec::with_capacity(steps);
    let mut p = last.position;
    let half_a = a.scale(0.5 * dt * dt);
    for k in 1..=steps {
        p = p.add(&v.scale(dt)).add(&half_a);
        v = v.add(&a.scale(dt));
        samples.push(StateSample {
            t: last.t + k as f64 * dt,
            position: p,
            orientation: last.orientation,
            speed: v.norm(),
            yaw_rate: None,
        });
    }
    Prediction {
        samples,
        fell_back: false,
    }
}

fn bicycle_rk4(
    last: &StateSample,
    wheelbase: f64,
    yaw_rate: f64,
    steps: usize,
    dt: f64,
) -> Vec<StateSample> {
    // Fixed steering that reproduces the observed yaw rate at constant speed.
    let v = last.speed;
    let steering = libm::atan(wheelbase * yaw_rate / v);
    let theta_dot = v * libm::tan(steering) / wheelbase;

    let deriv = |theta: f64| -> (f64, f64, f64) {
        (v * libm::cos(theta), v * libm::sin(theta), theta_dot)
    };

    let mut x = last.position.x();
    let mut y = last.position.y();
    let z = last.position.z();
    let mut theta = last.orientation.yaw();
    let mut samples = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (k1x, k1y, k1t) = deriv(theta);
        let (k2x, k2y, k2t) = deriv(theta + 0.5 * dt * k1t);
        let (k3x, k3y, k3t) = deriv(theta + 0.5 * dt * k2t);
        let (k4x, k4y, k4t) = deriv(theta + dt * k3t);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        theta += dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        samples.push(StateSample {
            t: last.t + k as f64 * dt,
            position: Vec3(x, y, z),
            orientation: Mat3::from_yaw(theta),
            speed: v,
            yaw_rate: Some(theta_dot),
        });
    }
    samples
}

/// Longitudinal safe distance between a rear vehicle at `v_rear` and a front
/// vehicle at `v_front`: worst-case response-time acceleration followed by
/// minimal braking, against the front vehicle's maximal braking.
pub fn rss_longitudinal_safe_distance(
    v_rear: f64,
    v_front: f64,
    rho: f64,
    accel_max: f64,
    brake_min: f64,
    brake_max: f64,
) -> f64 {
    let reach = v_rear * rho + 0.5 * accel_max * rho * rho;
    let v_after = v_rear + rho * accel_max;
    let rear_stop = v_after * v_after / (2.0 * brake_min);
    let front_stop = v_front * v_front / (2.0 * brake_max);
    (reach + rear_stop - front_stop).max(0.0)
}

/// Outcome classes of a constraint check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Satisfied,
    Violated,
    Inconclusive,
}

/// One constraint's verdict. Margin convention: `margin ≥ 0 ⇔ satisfied`,
/// expressed in the constraint's own unit; `None` when inconclusive.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConstraintVerdict {
    pub constraint_id: String,
    pub status: VerdictStatus,
    pub margin: Option<f64>,
    /// Raw measured value behind the worst margin (speed, |a|, or gap).
    pub worst_measured: Option<f64>,
    pub worst_t: Option<f64>,
    pub worst_element: Option<ElementId>,
}

impl ConstraintVerdict {
    pub fn satisfied(&self) -> bool {
        self.status == VerdictStatus::Satisfied
    }

    fn from_margin(
        constraint_id: &str,
        margin: Option<Worst>,
    ) -> ConstraintVerdict {
        match margin {
            Some(w) => ConstraintVerdict {
                constraint_id: String::from(constraint_id),
                status: if w.margin >= 0.0 {
                    VerdictStatus::Satisfied
                } else {
                    VerdictStatus::Violated
                },
                margin: Some(w.margin),
                worst_measured: Some(w.measured),
                worst_t: Some(w.t),
                worst_element: w.element,
            },
            None => ConstraintVerdict {
                constraint_id: String::from(constraint_id),
                status: VerdictStatus::Inconclusive,
                margin: None,
                worst_measured: None,
                worst_t: None,
                worst_element: None,
            },
        }
    }
}

/// Worst case seen while scanning a constraint.
#[derive(Debug, Clone)]
struct Worst {
    margin: f64,
    measured: f64,
    t: f64,
    element: Option<ElementId>,
}

/// A checkable constraint plus the scope it applies to.
struct ScopedConstraint {
    id: String,
    kind: ConstraintKind,
    limit: Option<f64>,
    rss: RssParams,
    /// Restrict to one element (annotation-scoped constraints).
    element: Option<ElementId>,
    /// Restrict to one class (rule-scoped bounds).
    class: Option<ElementClass>,
    /// Crossing-priority holder, for traffic rules.
    holder: Option<ElementId>,
}

fn rule_to_scoped(rule: &Rule, defaults: &RssParams) -> Option<ScopedConstraint> {
    if let Some((limit, class)) = rule.speed_limit() {
        return Some(ScopedConstraint {
            id: rule.id.clone(),
            kind: ConstraintKind::MaxSpeed,
            limit: Some(limit),
            rss: *defaults,
            element: None,
            class,
            holder: None,
        });
    }
    if let Some((limit, class)) = rule.accel_limit() {
        return Some(ScopedConstraint {
            id: rule.id.clone(),
            kind: ConstraintKind::MaxAccel,
            limit: Some(limit),
            rss: *defaults,
            element: None,
            class,
            holder: None,
        });
    }
    if rule.is_rss_gap() {
        let mut rss = *defaults;
        let get = |key: &str| {
            rule.params
                .get(key)
                .and_then(crate::model::ParamValue::as_quantity)
                .map(|q| q.value)
        };
        if let Some(v) = get("rho") {
            rss.rho = v;
        }
        if let Some(v) = get("accel_max") {
            rss.accel_max = v;
        }
        if let Some(v) = get("brake_min") {
            rss.brake_min = v;
        }
        if let Some(v) = get("brake_max") {
            rss.brake_max = v;
        }
        return Some(ScopedConstraint {
            id: rule.id.clone(),
            kind: ConstraintKind::MinGapRss,
            limit: None,
            rss,
            element: None,
            class: None,
            holder: None,
        });
    }
    if let Some(holder) = rule.crossing_priority_holder() {
        return Some(ScopedConstraint {
            id: rule.id.clone(),
            kind: ConstraintKind::TrafficRule,
            limit: None,
            rss: *defaults,
            element: None,
            class: None,
            holder: Some(ElementId::from(holder)),
        });
    }
    None
}

fn constraint_to_scoped(
    c: &Constraint,
    element: &ElementId,
    defaults: &RssParams,
) -> ScopedConstraint {
    let mut rss = *defaults;
    if let Some(q) = c.quantity("rho") {
        rss.rho = q.value;
    }
    if let Some(q) = c.quantity("accel_max") {
        rss.accel_max = q.value;
    }
    if let Some(q) = c.quantity("brake_min") {
        rss.brake_min = q.value;
    }
    if let Some(q) = c.quantity("brake_max") {
        rss.brake_max = q.value;
    }
    ScopedConstraint {
        id: c.id.clone(),
        kind: c.kind,
        limit: c.quantity("limit").map(|q| q.value),
        rss,
        element: Some(element.clone()),
        class: None,
        holder: c.text("holder").map(ElementId::from),
    }
}

/// Everything check_constraints needs to know about one element.
struct ElementKinematics<'a> {
    element: &'a Element,
    class: Option<&'a ElementClass>,
    accels: Vec<(f64, Vec3)>,
    extent: Option<Extent>,
}

fn gather_kinematics<'a>(desc: &'a ScenarioDescription) -> BTreeMap<&'a ElementId, ElementKinematics<'a>> {
    desc.elements
        .iter()
        .map(|e| {
            let temporal_ann = desc.temporal_for(&e.id);
            let accels = temporal_ann
                .filter(|a| !a.acceleration_samples.is_empty())
                .map(|a| a.acceleration_samples.clone())
                .unwrap_or_else(|| {
                    temporal::derive_accelerations(&temporal::derive_velocities(&e.trajectory))
                });
            let extent = latest_extent(desc, &e.id);
            (
                &e.id,
                ElementKinematics {
                    element: e,
                    class: desc.class_of(&e.id),
                    accels,
                    extent,
                },
            )
        })
        .collect()
}

fn latest_extent(desc: &ScenarioDescription, id: &ElementId) -> Option<Extent> {
    desc.spatial
        .iter()
        .filter(|a| &a.element_id == id)
        .max_by(|a, b| a.t.total_cmp(&b.t))
        .map(|a| a.occupancy)
}

/// Evaluates every constraint found in the context rules and the physical
/// annotations. Exactly one verdict per constraint, in gathering order.
pub fn check_constraints(
    desc: &ScenarioDescription,
    params: &EngineParams,
) -> Vec<ConstraintVerdict> {
    let mut scoped: Vec<ScopedConstraint> = Vec::new();
    for rule in &desc.context.rules {
        if let Some(s) = rule_to_scoped(rule, &params.physics.rss) {
            scoped.push(s);
        }
    }
    for ann in &desc.physical {
        for c in &ann.constraint_set {
            scoped.push(constraint_to_scoped(c, &ann.element_id, &params.physics.rss));
        }
    }

    let kin = gather_kinematics(desc);
    scoped
        .iter()
        .map(|c| evaluate_constraint(c, desc, &kin, params))
        .collect()
}

fn evaluate_constraint(
    c: &ScopedConstraint,
    desc: &ScenarioDescription,
    kin: &BTreeMap<&ElementId, ElementKinematics<'_>>,
    params: &EngineParams,
) -> ConstraintVerdict {
    let applies = |id: &ElementId, k: &ElementKinematics<'_>| -> bool {
        if let Some(scope) = &c.element {
            return scope == id;
        }
        if let Some(class) = &c.class {
            return k.class == Some(class);
        }
        true
    };

    match c.kind {
        ConstraintKind::MaxSpeed => {
            let limit = match c.limit {
                Some(l) => l,
                None => return ConstraintVerdict::from_margin(&c.id, None),
            };
            let mut worst: Option<Worst> = None;
            for (id, k) in kin {
                if !applies(id, k) {
                    continue;
                }
                for s in &k.element.trajectory {
                    let m = limit - s.speed;
                    if worst.as_ref().map(|w| m < w.margin).unwrap_or(true) {
                        worst = Some(Worst {
                            margin: m,
                            measured: s.speed,
                            t: s.t,
                            element: Some((*id).clone()),
                        });
                    }
                }
            }
            ConstraintVerdict::from_margin(&c.id, worst)
        }
        ConstraintKind::MaxAccel => {
            let limit = match c.limit {
                Some(l) => l,
                None => return ConstraintVerdict::from_margin(&c.id, None),
            };
            let mut worst: Option<Worst> = None;
            for (id, k) in kin {
                if !applies(id, k) {
                    continue;
                }
                for (t, a) in &k.accels {
                    let m = limit - a.norm();
                    if worst.as_ref().map(|w| m < w.margin).unwrap_or(true) {
                        worst = Some(Worst {
                            margin: m,
                            measured: a.norm(),
                            t: *t,
                            element: Some((*id).clone()),
                        });
                    }
                }
            }
            ConstraintVerdict::from_margin(&c.id, worst)
        }
        ConstraintKind::MinGapRss => {
            evaluate_rss(c, desc, kin, params)
        }
        ConstraintKind::TrafficRule => evaluate_priority(c, desc, kin, params),
    }
}

fn snapshot_box(k: &ElementKinematics<'_>, t: f64) -> Option<ElementBox> {
    let state = k.element.state_at(t)?;
    let extent = k.extent?;
    Some(ElementBox::from_pose(
        &state.position,
        &state.orientation,
        &extent,
    ))
}

fn evaluate_rss(
    c: &ScopedConstraint,
    desc: &ScenarioDescription,
    kin: &BTreeMap<&ElementId, ElementKinematics<'_>>,
    params: &EngineParams,
) -> ConstraintVerdict {
    let ego = match kin.get(&desc.ego_id) {
        Some(e) => e,
        None => return ConstraintVerdict::from_margin(&c.id, None),
    };
    if ego.extent.is_none() || ego.element.trajectory.is_empty() {
        return ConstraintVerdict::from_margin(&c.id, None);
    }
    let mut worst: Option<Worst> = None;
    for s in &ego.element.trajectory {
        let ego_box = match snapshot_box(ego, s.t) {
            Some(b) => b,
            None => continue,
        };
        let ego_xy = Vec2::new(s.position.x(), s.position.y());
        let heading = s.orientation.yaw();
        for (id, k) in kin {
            if **id == desc.ego_id {
                continue;
            }
            let state = match k.element.state_at(s.t) {
                Some(st) => st,
                None => continue,
            };
            let target_xy = Vec2::new(state.position.x(), state.position.y());
            let direction =
                classify_directional_relation(&ego_xy, heading, &target_xy, &params.geometry);
            if direction != Some(SpatialRelation::FrontOf) {
                continue;
            }
            let lead_box = match snapshot_box(k, s.t) {
                Some(b) => b,
                None => continue,
            };
            let gap = surface_distance(&ego_box, &lead_box);
            let safe = rss_longitudinal_safe_distance(
                s.speed,
                state.speed,
                c.rss.rho,
                c.rss.accel_max,
                c.rss.brake_min,
                c.rss.brake_max,
            );
            let m = gap - safe;
            if worst.as_ref().map(|w| m < w.margin).unwrap_or(true) {
                worst = Some(Worst {
                    margin: m,
                    measured: gap,
                    t: s.t,
                    element: Some((*id).clone()),
                });
            }
        }
    }
    ConstraintVerdict::from_margin(&c.id, worst)
}

/// Crossing priority: no other driving element may move through the holder's
/// crossing corridor. Margin is `still_speed − fastest intruder speed` in m/s.
fn evaluate_priority(
    c: &ScopedConstraint,
    desc: &ScenarioDescription,
    kin: &BTreeMap<&ElementId, ElementKinematics<'_>>,
    params: &EngineParams,
) -> ConstraintVerdict {
    let holder_id = match &c.holder {
        Some(h) => h,
        None => return ConstraintVerdict::from_margin(&c.id, None),
    };
    let holder = match kin.get(holder_id) {
        Some(h) => h,
        None => return ConstraintVerdict::from_margin(&c.id, None),
    };
    if holder.element.trajectory.is_empty() {
        return ConstraintVerdict::from_margin(&c.id, None);
    }
    let still = params.temporal.still_speed;
    let mut worst: Option<Worst> = None;
    for s in &holder.element.trajectory {
        let corridor = crossing_corridor(s, holder.extent.as_ref(), params);
        for (id, k) in kin {
            if *id == holder_id {
                continue;
            }
            let driving = k.class.map(|cl| cl.is_driving()).unwrap_or(false);
            if !driving {
                continue;
            }
            let state = match k.element.state_at(s.t) {
                Some(st) => st,
                None => continue,
            };
            if state.speed < still {
                continue;
            }
            let Some(fp) = k.extent.map(|e| {
                Footprint::from_pose(&state.position, &state.orientation, &e)
            }) else {
                continue;
            };
            let intrudes = crate::geometry::footprint_distance(&corridor, &fp) == 0.0;
            if intrudes {
                let m = still - state.speed;
                if worst.as_ref().map(|w| m < w.margin).unwrap_or(true) {
                    worst = Some(Worst {
                        margin: m,
                        measured: state.speed,
                        t: s.t,
                        element: Some((*id).clone()),
                    });
                }
            }
        }
    }
    ConstraintVerdict::from_margin(
        &c.id,
        worst.or(Some(Worst {
            margin: still,
            measured: 0.0,
            t: desc.window.end,
            element: None,
        })),
    )
}

/// The corridor an element sweeps when continuing straight ahead.
fn crossing_corridor(s: &StateSample, extent: Option<&Extent>, params: &EngineParams) -> Footprint {
    let width = extent.map(|e| e.width).unwrap_or(1.0);
    let len = params.decision.corridor_length;
    let heading = s.orientation.yaw();
    let forward = Vec2::new(libm::cos(heading), libm::sin(heading));
    let center = Vec2::new(s.position.x(), s.position.y()).add(&forward.scale(len * 0.5));
    Footprint::new(
        center,
        len * 0.5,
        width * 0.5 + params.decision.corridor_margin,
        heading,
    )
}

/// Per-element inputs for anticipation, resolved from the description.
struct PredictionPlan<'a> {
    element: &'a Element,
    model: MotionModel,
    extent: Option<Extent>,
}

/// Anticipates the scenario over `(0, horizon]`: predicts every element with
/// its assigned model, re-derives topology and occlusion per step, and emits
/// relation deltas, occlusion transitions and predicted rule violations.
pub fn anticipate(
    desc: &ScenarioDescription,
    horizon: f64,
    dt: f64,
    params: &EngineParams,
) -> Result<ScenarioAnticipation, PhysicsError> {
    if !(horizon > 0.0) {
        return Err(PhysicsError::BadHorizon(horizon));
    }
    if !(dt > 0.0) {
        return Err(PhysicsError::BadStep(dt));
    }

    let mut plans: BTreeMap<ElementId, PredictionPlan<'_>> = BTreeMap::new();
    for element in &desc.elements {
        if element.trajectory.is_empty() {
            continue;
        }
        let model = match desc.physical_for(&element.id) {
            Some(ann) => MotionModel {
                kind: ann.model.clone(),
                wheelbase: desc
                    .class_of(&element.id)
                    .map(|cl| params.physics.wheelbase(cl)),
            },
            None => {
                let class = desc
                    .class_of(&element.id)
                    .cloned()
                    .unwrap_or(ElementClass::Vehicle);
                let state = element
                    .last_state()
                    .map(|s| {
                        if s.speed < params.temporal.still_speed {
                            MotionState::Stopped
                        } else {
                            MotionState::Moving
                        }
                    })
                    .unwrap_or(MotionState::Stopped);
                assign_model(element, &class, &state, params)
            }
        };
        plans.insert(
            element.id.clone(),
            PredictionPlan {
                element,
                model,
                extent: latest_extent(desc, &element.id),
            },
        );
    }

    let mut ant = ScenarioAnticipation::empty(desc.id.clone(), horizon, dt);
    for (id, plan) in &plans {
        let prediction = predict(plan.element, &plan.model, horizon, dt)?;
        ant.predicted_trajectories
            .insert(id.clone(), prediction.samples);
    }

    derive_future_events(desc, &plans, &mut ant, params)?;
    sort_anticipation(&mut ant);
    Ok(ant)
}

/// Canonical ordering of the anticipation lists, shared with the serialisers.
pub fn sort_anticipation(ant: &mut ScenarioAnticipation) {
    ant.predicted_events.sort_by(|a, b| {
        a.t.total_cmp(&b.t)
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| a.elements.cmp(&b.elements))
    });
    ant.predicted_relations.sort_by(|a, b| {
        a.t.total_cmp(&b.t)
            .then_with(|| a.element_id.cmp(&b.element_id))
            .then_with(|| a.other.cmp(&b.other))
            .then_with(|| a.relation.cmp(&b.relation))
            .then_with(|| a.change.cmp(&b.change))
    });
}

fn snapshot_from_predictions(
    plans: &BTreeMap<ElementId, PredictionPlan<'_>>,
    ant: &ScenarioAnticipation,
    step: usize,
    t: f64,
) -> Vec<SnapshotElement> {
    let mut snapshot = Vec::new();
    for (id, plan) in plans {
        let Some(extent) = plan.extent else { continue };
        let sample = if step == 0 {
            plan.element.last_state().cloned()
        } else {
            ant.predicted_trajectories
                .get(id)
                .and_then(|s| s.get(step - 1))
                .cloned()
        };
        if let Some(sample) = sample {
            snapshot.push(SnapshotElement {
                id: id.clone(),
                t,
                position: sample.position,
                orientation: sample.orientation,
                extent,
            });
        }
    }
    snapshot
}

fn occlusion_map(
    snapshot: &[SnapshotElement],
    ego_id: &ElementId,
) -> Result<BTreeMap<ElementId, Visibility>, GeometryError> {
    let mut out = BTreeMap::new();
    let Some(ego) = snapshot.iter().find(|e| &e.id == ego_id) else {
        return Ok(out);
    };
    let ego_xy = Vec2::new(ego.position.x(), ego.position.y());
    for target in snapshot {
        if &target.id == ego_id {
            continue;
        }
        let occluders: Vec<Footprint> = snapshot
            .iter()
            .filter(|o| o.id != target.id && &o.id != ego_id)
            .map(|o| o.footprint())
            .collect();
        let (verdict, _) = occlusion_state(&ego_xy, &target.footprint(), &occluders)?;
        out.insert(target.id.clone(), verdict);
    }
    Ok(out)
}

fn derive_future_events(
    desc: &ScenarioDescription,
    plans: &BTreeMap<ElementId, PredictionPlan<'_>>,
    ant: &mut ScenarioAnticipation,
    params: &EngineParams,
) -> Result<(), PhysicsError> {
    let steps = libm::floor(ant.horizon / ant.dt + 1e-9) as usize;
    let rss_rules: Vec<&Rule> = desc
        .context
        .rules
        .iter()
        .filter(|r| r.is_rss_gap())
        .collect();

    let baseline = snapshot_from_predictions(plans, ant, 0, desc.window.end);
    let mut prev_topology = derive_topology(&baseline, &desc.ego_id, &params.geometry)?;
    let mut prev_visibility = occlusion_map(&baseline, &desc.ego_id)?;
    let mut rss_flagged: BTreeSet<ElementId> = BTreeSet::new();

    for step in 1..=steps {
        let t = step as f64 * ant.dt;
        let snapshot = snapshot_from_predictions(plans, ant, step, t);
        let topology = derive_topology(&snapshot, &desc.ego_id, &params.geometry)?;
        for (id, relations) in &topology {
            let empty = BTreeSet::new();
            let before = prev_topology.get(id).unwrap_or(&empty);
            for added in relations.difference(before) {
                ant.predicted_relations.push(TopologyDelta {
                    t,
                    element_id: id.clone(),
                    other: added.0.clone(),
                    relation: added.1.clone(),
                    change: DeltaChange::Added,
                });
            }
            for removed in before.difference(relations) {
                ant.predicted_relations.push(TopologyDelta {
                    t,
                    element_id: id.clone(),
                    other: removed.0.clone(),
                    relation: removed.1.clone(),
                    change: DeltaChange::Removed,
                });
            }
        }

        let visibility = occlusion_map(&snapshot, &desc.ego_id)?;
        for (id, verdict) in &visibility {
            let before = prev_visibility.get(id);
            let was_full = before == Some(&Visibility::Occluded);
            let is_full = verdict == &Visibility::Occluded;
            if is_full && !was_full && before.is_some() {
                ant.predicted_events.push(PredictedEvent {
                    t,
                    kind: EventKind::Occluded,
                    elements: alloc::vec![id.clone()],
                    detail: None,
                });
            }
            if was_full && !is_full {
                ant.predicted_events.push(PredictedEvent {
                    t,
                    kind: EventKind::Reappears,
                    elements: alloc::vec![id.clone()],
                    detail: None,
                });
            }
        }

        // Predicted safe-distance violations, once per lead element.
        if !rss_rules.is_empty() {
            if let Some(ego) = snapshot.iter().find(|e| e.id == desc.ego_id) {
                let ego_speed = plans[&desc.ego_id]
                    .element
                    .last_state()
                    .map(|s| s.speed)
                    .unwrap_or(0.0);
                let ego_xy = Vec2::new(ego.position.x(), ego.position.y());
                let heading = ego.orientation.yaw();
                for target in &snapshot {
                    if target.id == desc.ego_id || rss_flagged.contains(&target.id) {
                        continue;
                    }
                    let txy = Vec2::new(target.position.x(), target.position.y());
                    if classify_directional_relation(&ego_xy, heading, &txy, &params.geometry)
                        != Some(SpatialRelation::FrontOf)
                    {
                        continue;
                    }
                    let target_speed = ant
                        .predicted_trajectories
                        .get(&target.id)
                        .and_then(|s| s.get(step - 1))
                        .map(|s| s.speed)
                        .unwrap_or(0.0);
                    let gap = surface_distance(&ego.element_box(), &target.element_box());
                    for rule in &rss_rules {
                        let scoped = rule_to_scoped(rule, &params.physics.rss)
                            .expect("rss rule converts");
                        let safe = rss_longitudinal_safe_distance(
                            ego_speed,
                            target_speed,
                            scoped.rss.rho,
                            scoped.rss.accel_max,
                            scoped.rss.brake_min,
                            scoped.rss.brake_max,
                        );
                        if gap < safe {
                            ant.predicted_events.push(PredictedEvent {
                                t,
                                kind: EventKind::ConstraintViolation,
                                elements: alloc::vec![desc.ego_id.clone(), target.id.clone()],
                                detail: Some(rule.id.clone()),
                            });
                            rss_flagged.insert(target.id.clone());
                            break;
                        }
                    }
                }
            }
        }

        prev_topology = topology;
        prev_visibility = visibility;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Element;

    fn element_with(samples: Vec<StateSample>) -> Element {
        Element {
            id: ElementId::from("e"),
            trajectory: samples,
        }
    }

    fn cv_sample(t: f64, x: f64, y: f64, yaw: f64, speed: f64) -> StateSample {
        StateSample {
            t,
            position: Vec3(x, y, 0.0),
            orientation: Mat3::from_yaw(yaw),
            speed,
            yaw_rate: None,
        }
    }

    #[test]
    fn constant_velocity_analytic() {
        let e = element_with(alloc::vec![cv_sample(0.0, 0.0, 0.0, 0.0, 1.0)]);
        let model = MotionModel::of_kind(ModelKind::ConstantVelocity);
        let p = predict(&e, &model, 2.0, 0.5).unwrap();
        assert_eq!(p.samples.len(), 4);
        let last = p.samples.last().unwrap();
        assert!((last.position.x() - 2.0).abs() < 1e-12);
        assert!(last.position.y().abs() < 1e-12);
        assert!(!p.fell_back);
    }

    #[test]
    fn static_model_holds_pose() {
        let e = element_with(alloc::vec![cv_sample(0.0, 3.0, -1.0, 0.7, 0.0)]);
        let p = predict(&e, &MotionModel::of_kind(ModelKind::Static), 5.0, 0.5).unwrap();
        for s in &p.samples {
            assert_eq!(s.position, Vec3(3.0, -1.0, 0.0));
        }
    }

    #[test]
    fn bad_inputs_error() {
        let e = element_with(alloc::vec![cv_sample(0.0, 0.0, 0.0, 0.0, 1.0)]);
        let m = MotionModel::of_kind(ModelKind::ConstantVelocity);
        assert!(matches!(
            predict(&e, &m, 0.0, 0.5),
            Err(PhysicsError::BadHorizon(_))
        ));
        assert!(matches!(
            predict(&e, &m, 1.0, 0.0),
            Err(PhysicsError::BadStep(_))
        ));
        let empty = element_with(Vec::new());
        assert!(matches!(
            predict(&empty, &m, 1.0, 0.5),
            Err(PhysicsError::NoState)
        ));
    }

    #[test]
    fn bicycle_without_yaw_rate_falls_back() {
        let e = element_with(alloc::vec![cv_sample(0.0, 0.0, 0.0, 0.0, 2.0)]);
        let p = predict(&e, &MotionModel::bicycle(2.8), 1.0, 0.5).unwrap();
        assert!(p.fell_back);
        assert!((p.samples.last().unwrap().position.x() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bicycle_matches_fine_euler_oracle() {
        // Fixed steering of 0.1 rad at 2 m/s on a 2.8 m wheelbase over 5 s.
        let wheelbase = 2.8;
        let steering = 0.1f64;
        let speed = 2.0;
        let yaw_rate = speed * libm::tan(steering) / wheelbase;
        let mut e = element_with(alloc::vec![StateSample {
            t: 0.0,
            position: Vec3::ZERO,
            orientation: Mat3::IDENTITY,
            speed,
            yaw_rate: Some(yaw_rate),
        }]);
        e.id = ElementId::from("bike");
        let p = predict(&e, &MotionModel::bicycle(wheelbase), 5.0, 0.05).unwrap();
        assert!(!p.fell_back);

        // Independent oracle: forward Euler at dt = 1e-4.
        let (mut x, mut y, mut theta) = (0.0f64, 0.0f64, 0.0f64);
        let fine = 1e-4;
        let theta_dot = speed * libm::tan(steering) / wheelbase;
        let mut t = 0.0;
        while t < 5.0 - fine * 0.5 {
            x += speed * libm::cos(theta) * fine;
            y += speed * libm::sin(theta) * fine;
            theta += theta_dot * fine;
            t += fine;
        }
        let last = p.samples.last().unwrap();
        assert!(
            (last.position.x() - x).abs() < 1e-4 && (last.position.y() - y).abs() < 1e-4,
            "rk4 ({}, {}) vs euler ({x}, {y})",
            last.position.x(),
            last.position.y()
        );
    }

    #[test]
    fn prediction_semigroup_static_and_cv() {
        let e = element_with(alloc::vec![cv_sample(0.0, 1.0, 2.0, 0.9, 3.3)]);
        for kind in [ModelKind::Static, ModelKind::ConstantVelocity] {
            let model = MotionModel::of_kind(kind);
            let full = predict(&e, &model, 4.0, 0.5).unwrap().samples;
            let head = predict(&e, &model, 2.0, 0.5).unwrap().samples;
            let mut restart = e.clone();
            restart.trajectory.extend(head.clone());
            let tail = predict(&restart, &model, 2.0, 0.5).unwrap().samples;
            let stitched: Vec<&StateSample> = head.iter().chain(tail.iter()).collect();
            assert_eq!(full.len(), stitched.len());
            for (a, b) in full.iter().zip(stitched) {
                assert_eq!(a.position, b.position, "semigroup must be exact");
                assert_eq!(a.speed, b.speed);
            }
        }
    }

    #[test]
    fn prediction_semigroup_constant_acceleration() {
        // Quadratic motion: p = (t², 0.5 t), v = (2t, 0.5), a = (2, 0).
        let mut samples = Vec::new();
        for k in 0..5 {
            let t = k as f64 * 0.5;
            samples.push(StateSample {
                t,
                position: Vec3(t * t, 0.5 * t, 0.0),
                orientation: Mat3::IDENTITY,
                speed: libm::hypot(2.0 * t, 0.5),
                yaw_rate: None,
            });
        }
        let e = element_with(samples);
        let model = MotionModel::of_kind(ModelKind::ConstantAcceleration);
        let full = predict(&e, &model, 4.0, 0.5).unwrap().samples;
        let head = predict(&e, &model, 2.0, 0.5).unwrap().samples;
        let mut restart = e.clone();
        restart.trajectory.extend(head.clone());
        let tail = predict(&restart, &model, 2.0, 0.5).unwrap().samples;
        for (a, b) in full.iter().zip(head.iter().chain(tail.iter())) {
            let d = a.position.sub(&b.position).norm();
            assert!(d < 1e-6, "constant-acceleration semigroup drift {d}");
        }
        // And the prediction actually extrapolates the parabola.
        let last = full.last().unwrap();
        let t_end = 2.0 + 4.0;
        assert!((last.position.x() - t_end * t_end).abs() < 1e-6);
    }

    #[test]
    fn rss_hand_derived_value() {
        // v_r·ρ + a·ρ²/2 + (v_r + ρa)²/(2 b_min) − v_f²/(2 b_max)
        // = 10 + 1 + 144/8 − 0 = 29.
        let d = rss_longitudinal_safe_distance(10.0, 0.0, 1.0, 2.0, 4.0, 8.0);
        assert!((d - 29.0).abs() < 1e-9);
        // A stationary rear vehicle still owes the response-time terms:
        // ½·2·1² + (1·2)²/(2·4) = 1.5.
        let stationary = rss_longitudinal_safe_distance(0.0, 0.0, 1.0, 2.0, 4.0, 8.0);
        assert!((stationary - 1.5).abs() < 1e-12);
        // The clamp keeps the distance non-negative for fast front vehicles.
        assert_eq!(rss_longitudinal_safe_distance(0.0, 10.0, 1.0, 2.0, 4.0, 8.0), 0.0);
    }

    #[test]
    fn rss_monotone_in_rear_speed() {
        let mut prev = -1.0;
        for i in 0..=100 {
            let v = i as f64 * 0.3;
            let d = rss_longitudinal_safe_distance(v, 5.0, 1.0, 2.0, 4.0, 8.0);
            assert!(d >= prev, "safe distance decreased at v_rear = {v}");
            prev = d;
        }
    }

    fn quadratic_mover(accel: f64, samples: usize, dt: f64) -> Element {
        let mut e = Element::new("mover");
        for k in 0..samples {
            let t = k as f64 * dt;
            e.trajectory.push(StateSample {
                t,
                position: Vec3(0.5 * accel * t * t, 0.0, 0.0),
                orientation: Mat3::IDENTITY,
                speed: accel * t,
                yaw_rate: None,
            });
        }
        e
    }

    #[test]
    fn constraint_verdicts_margins_and_totality() {
        let params = EngineParams::default();
        let mut desc = ScenarioDescription::empty(
            "c",
            crate::model::TimeInterval::new(-2.0, 0.0),
            ElementId::from("ego"),
        );
        // |a| = 12 m/s² in the trajectory interior, exactly recovered by the
        // central differences.
        let mut racer = quadratic_mover(12.0, 5, 0.5);
        for s in &mut racer.trajectory {
            s.t -= 2.0;
        }
        racer.id = ElementId::from("racer");
        desc.elements.push(racer);
        desc.semantic.push(crate::model::SemanticAnnotation {
            element_id: ElementId::from("racer"),
            t: 0.0,
            class: ElementClass::Vehicle,
            attributes: Vec::new(),
            state: MotionState::Moving,
            affordances: Vec::new(),
        });
        desc.context.rules.push(
            crate::model::Rule::new("r_accel", crate::vocab::RuleKind::Safety)
                .with_text("type", "max_accel")
                .with_quantity("limit", 8.0, crate::vocab::Unit::MetersPerSecondSquared)
                .with_text("class", "vehicle"),
        );
        // A second, generous bound stays satisfied.
        desc.context.rules.push(
            crate::model::Rule::new("r_speed", crate::vocab::RuleKind::Traffic)
                .with_text("type", "max_speed")
                .with_quantity("limit", 50.0, crate::vocab::Unit::MetersPerSecond),
        );
        // An annotation-scoped constraint on an element without enough
        // samples to estimate accelerations: inconclusive.
        let lonely = element_with(alloc::vec![cv_sample(0.0, 5.0, 5.0, 0.0, 1.0)]);
        let mut lonely = lonely;
        lonely.id = ElementId::from("lonely");
        desc.elements.push(lonely);
        desc.physical.push(crate::model::PhysicalAnnotation {
            element_id: ElementId::from("lonely"),
            model: ModelKind::ConstantVelocity,
            material_tags: Vec::new(),
            constraint_set: alloc::vec![crate::model::Constraint::new(
                "lonely.max_accel",
                crate::vocab::ConstraintKind::MaxAccel,
            )
            .with_quantity("limit", 8.0, crate::vocab::Unit::MetersPerSecondSquared)],
            violations: Vec::new(),
        });

        let verdicts = check_constraints(&desc, &params);
        // Totality: one verdict per constraint, rules first.
        assert_eq!(verdicts.len(), 3);
        let accel = &verdicts[0];
        assert_eq!(accel.constraint_id, "r_accel");
        assert_eq!(accel.status, VerdictStatus::Violated);
        assert!((accel.margin.unwrap() + 4.0).abs() < 1e-9, "{:?}", accel.margin);
        assert!((accel.worst_measured.unwrap() - 12.0).abs() < 1e-9);
        assert_eq!(verdicts[1].status, VerdictStatus::Satisfied);
        assert_eq!(verdicts[2].status, VerdictStatus::Inconclusive);
        assert_eq!(verdicts[2].margin, None);
    }

    #[test]
    fn anticipate_rejects_bad_horizon() {
        let desc = ScenarioDescription::empty(
            "x",
            crate::model::TimeInterval::new(-1.0, 0.0),
            ElementId::from("ego"),
        );
        let params = EngineParams::default();
        assert!(matches!(
            anticipate(&desc, 0.0, 0.5, &params),
            Err(PhysicsError::BadHorizon(_))
        ));
    }

    #[test]
    fn all_static_scene_anticipates_no_events() {
        let params = EngineParams::default();
        let mut desc = ScenarioDescription::empty(
            "static",
            crate::model::TimeInterval::new(-2.0, 0.0),
            ElementId::from("ego"),
        );
        for (id, x) in [("ego", 0.0), ("crate_a", 8.0), ("crate_b", -6.0)] {
            let mut e = Element::new(id);
            for k in 0..=4 {
                e.trajectory.push(cv_sample(-2.0 + k as f64 * 0.5, x, 0.0, 0.0, 0.0));
            }
            desc.elements.push(e);
            desc.spatial.push(crate::model::SpatialAnnotation {
                element_id: ElementId::from(id),
                t: 0.0,
                position: Vec3(x, 0.0, 0.0),
                orientation: Mat3::IDENTITY,
                distance_to_ego: 0.0,
                occupancy: Extent::new(1.0, 1.0, 1.0),
                topology: BTreeSet::new(),
            });
        }
        let ant = anticipate(&desc, 5.0, 0.5, &params).unwrap();
        assert!(ant.predicted_events.is_empty());
        assert!(ant.predicted_relations.is_empty());
        let report = crate::validate_anticipation(&ant, &desc);
        assert!(report.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn converging_elements_predict_touching() {
        // Two constant-velocity boxes closing head-on at 2 m/s combined from
        // 10 m face gap: touching predicted near t = 5 s.
        let params = EngineParams::default();
        let mut desc = ScenarioDescription::empty(
            "conv",
            crate::model::TimeInterval::new(-1.0, 0.0),
            ElementId::from("ego"),
        );
        let mut ego = Element::new("ego");
        let mut other = Element::new("car_b");
        for k in 0..=2 {
            let t = -1.0 + k as f64 * 0.5;
            ego.trajectory.push(cv_sample(t, 1.0 * t, 0.0, 0.0, 1.0));
            other
                .trajectory
                .push(cv_sample(t, 12.0 - 1.0 * t, 0.0, core::f64::consts::PI, 1.0));
        }
        desc.elements.push(ego);
        desc.elements.push(other);
        for id in ["ego", "car_b"] {
            desc.spatial.push(crate::model::SpatialAnnotation {
                element_id: ElementId::from(id),
                t: 0.0,
                position: Vec3::ZERO,
                orientation: Mat3::IDENTITY,
                distance_to_ego: 0.0,
                occupancy: Extent::new(1.0, 1.0, 1.0),
                topology: BTreeSet::new(),
            });
        }
        let ant = anticipate(&desc, 8.0, 0.25, &params).unwrap();
        let touch = ant
            .predicted_relations
            .iter()
            .find(|d| {
                d.relation == SpatialRelation::Touching
                    && d.change == DeltaChange::Added
                    && d.element_id == ElementId::from("car_b")
                    && d.other == ElementId::from("ego")
            })
            .expect("touching must be predicted");
        // Face gap at t=0 is 12 − 2·0.5 − 0·... = 11 m; closing speed 2 m/s;
        // touch threshold 0.05 m → analytic touch at (11 − 0.05)/2 ≈ 5.475 s.
        assert!(
            (touch.t - 5.5).abs() <= 0.25 + 1e-9,
            "touch predicted at {}",
            touch.t
        );
    }
}
