//! Tunable thresholds shared by the derivation engines.
//!
//! Defaults are deliberately conservative urban values; every field is exposed
//! through the CLI config file and printed by `config --show`.

use crate::vocab::ElementClass;
use serde::{Deserialize, Serialize};

/// Geometry thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryParams {
    /// Half-angle of the front/behind/left/right sectors, degrees.
    pub sector_half_angle_deg: f64,
    /// Surface gap at or below which two elements are `touching`, metres.
    pub touch_gap: f64,
    /// Surface gap at or below which two elements are `near`, metres.
    pub near_radius: f64,
    /// Planar distance below which two centres count as coincident, metres.
    pub coincident_eps: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            sector_half_angle_deg: 45.0,
            touch_gap: 0.05,
            near_radius: 10.0,
            coincident_eps: 1e-9,
        }
    }
}

/// Temporal classification thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemporalParams {
    /// Speed below which an element counts as still, m/s.
    pub still_speed: f64,
    /// Stillness duration after which a driving element counts as parked, s.
    pub park_after: f64,
    /// Slack when ordering two intervals, s.
    pub order_eps: f64,
    /// Relative tolerance when matching interval durations for periodicity.
    pub period_duration_tol: f64,
}

impl Default for TemporalParams {
    fn default() -> Self {
        TemporalParams {
            still_speed: 0.1,
            park_after: 5.0,
            order_eps: 0.1,
            period_duration_tol: 0.1,
        }
    }
}

/// Reaction-time and braking parameters of the longitudinal safe-distance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RssParams {
    /// Response time, s.
    pub rho: f64,
    /// Worst-case acceleration of the rear vehicle during the response time, m/s².
    pub accel_max: f64,
    /// Minimum comfortable braking of the rear vehicle, m/s².
    pub brake_min: f64,
    /// Maximum braking of the front vehicle, m/s².
    pub brake_max: f64,
}

impl Default for RssParams {
    fn default() -> Self {
        RssParams {
            rho: 1.0,
            accel_max: 2.0,
            brake_min: 4.0,
            brake_max: 8.0,
        }
    }
}

/// Physics thresholds: class bounds, model assignment and integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsParams {
    /// Per-class acceleration bounds, m/s².
    pub accel_bound_vehicle: f64,
    pub accel_bound_pedestrian: f64,
    pub accel_bound_cyclist: f64,
    /// Per-class speed bounds, m/s (urban defaults).
    pub speed_bound_vehicle: f64,
    pub speed_bound_pedestrian: f64,
    pub speed_bound_cyclist: f64,
    /// Yaw rate above which a driving element is assigned the bicycle model, rad/s.
    pub turning_yaw_rate: f64,
    /// Wheelbases used by the bicycle model, metres.
    pub wheelbase_vehicle: f64,
    pub wheelbase_public_transport: f64,
    pub wheelbase_cyclist: f64,
    pub rss: RssParams,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            accel_bound_vehicle: 8.0,
            accel_bound_pedestrian: 3.0,
            accel_bound_cyclist: 4.0,
            speed_bound_vehicle: 13.89,
            speed_bound_pedestrian: 3.0,
            speed_bound_cyclist: 8.0,
            turning_yaw_rate: 0.01,
            wheelbase_vehicle: 2.8,
            wheelbase_public_transport: 6.0,
            wheelbase_cyclist: 1.2,
            rss: RssParams::default(),
        }
    }
}

impl PhysicsParams {
    pub fn accel_bound(&self, class: &ElementClass) -> f64 {
        match class {
            ElementClass::Pedestrian => self.accel_bound_pedestrian,
            ElementClass::Cyclist => self.accel_bound_cyclist,
            _ => self.accel_bound_vehicle,
        }
    }

    pub fn speed_bound(&self, class: &ElementClass) -> f64 {
        match class {
            ElementClass::Pedestrian => self.speed_bound_pedestrian,
            ElementClass::Cyclist => self.speed_bound_cyclist,
            _ => self.speed_bound_vehicle,
        }
    }

    pub fn wheelbase(&self, class: &ElementClass) -> f64 {
        match class {
            ElementClass::PublicTransport => self.wheelbase_public_transport,
            ElementClass::Cyclist => self.wheelbase_cyclist,
            _ => self.wheelbase_vehicle,
        }
    }
}

/// Decision-rule geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecisionParams {
    /// How far ahead of the ego the conflict corridor extends, metres.
    pub corridor_length: f64,
    /// Lateral margin added to the ego half-width, metres.
    pub corridor_margin: f64,
}

impl Default for DecisionParams {
    fn default() -> Self {
        DecisionParams {
            corridor_length: 15.0,
            corridor_margin: 0.3,
        }
    }
}

/// Scoring tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringParams {
    /// Distance credit tolerance |Δd|, metres.
    pub distance_tol: f64,
    /// Snapshot-time matching tolerance, s.
    pub time_tol: f64,
    /// Maximum centre distance for proximity element matching, metres.
    pub match_max_distance: f64,
    /// Event matching time tolerance, s.
    pub event_time_tol: f64,
    /// Per-dimension aggregate weights (semantic, spatial, temporal, physical).
    pub dimension_weights: [f64; 4],
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            distance_tol: 0.5,
            time_tol: 1e-6,
            match_max_distance: 2.0,
            event_time_tol: 1.0,
            dimension_weights: [0.25, 0.25, 0.25, 0.25],
        }
    }
}

/// All engine thresholds in one bundle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineParams {
    pub geometry: GeometryParams,
    pub temporal: TemporalParams,
    pub physics: PhysicsParams,
    pub decision: DecisionParams,
    pub scoring: ScoringParams,
}
