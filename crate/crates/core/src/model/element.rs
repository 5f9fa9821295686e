//! Elements and their raw state trajectories.

use super::{ElementId, TimeInterval};
use crate::math::{Mat3, Vec3};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// One kinematic state of an element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub t: f64,
    pub position: Vec3,
    pub orientation: Mat3,
    pub speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_rate: Option<f64>,
}

impl StateSample {
    pub fn heading(&self) -> f64 {
        self.orientation.yaw()
    }
}

/// A scenario element: unique id plus its observed trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    #[serde(default)]
    pub trajectory: Vec<StateSample>,
}

impl Element {
    pub fn new(id: impl Into<ElementId>) -> Self {
        Element {
            id: id.into(),
            trajectory: Vec::new(),
        }
    }

    pub fn span(&self) -> Option<TimeInterval> {
        match (self.trajectory.first(), self.trajectory.last()) {
            (Some(a), Some(b)) => Some(TimeInterval::new(a.t, b.t)),
            _ => None,
        }
    }

    /// State at `t`: exact sample when `t` hits the grid, otherwise linear
    /// position / spherical orientation interpolation between neighbours.
    pub fn state_at(&self, t: f64) -> Option<StateSample> {
        let traj = &self.trajectory;
        if traj.is_empty() {
            return None;
        }
        if let Some(exact) = traj.iter().find(|s| s.t == t) {
            return Some(exact.clone());
        }
        if t < traj[0].t || t > traj[traj.len() - 1].t {
            return None;
        }
        let hi = traj.partition_point(|s| s.t < t);
        let (a, b) = (&traj[hi - 1], &traj[hi]);
        let alpha = (t - a.t) / (b.t - a.t);
        let yaw_rate = match (a.yaw_rate, b.yaw_rate) {
            (Some(ra), Some(rb)) => Some(ra + (rb - ra) * alpha),
            _ => None,
        };
        Some(StateSample {
            t,
            position: a.position.lerp(&b.position, alpha),
            orientation: a.orientation.slerp(&b.orientation, alpha),
            speed: a.speed + (b.speed - a.speed) * alpha,
            yaw_rate,
        })
    }

    pub fn speed_at(&self, t: f64) -> Option<f64> {
        self.state_at(t).map(|s| s.speed)
    }

    pub fn last_state(&self) -> Option<&StateSample> {
        self.trajectory.last()
    }
}

impl From<From2D> for StateSample {
    fn from(v: From2D) -> Self {
        StateSample {
            t: v.t,
            position: Vec3(v.x, v.y, 0.0),
            orientation: Mat3::from_yaw(v.yaw),
            speed: v.speed,
            yaw_rate: None,
        }
    }
}

/// Plan-view shorthand for building samples in code and tests.
#[derive(Debug, Clone, Copy)]
pub struct From2D {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub speed: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, x: f64, yaw: f64, speed: f64) -> StateSample {
        StateSample {
            t,
            position: Vec3(x, 0.0, 0.0),
            orientation: Mat3::from_yaw(yaw),
            speed,
            yaw_rate: None,
        }
    }

    #[test]
    fn interpolation_hits_exact_samples() {
        let mut e = Element::new("a");
        e.trajectory = alloc::vec![sample(0.0, 0.0, 0.0, 1.0), sample(1.0, 2.0, 0.4, 2.0)];
        let s = e.state_at(0.0).unwrap();
        assert_eq!(s.position, Vec3(0.0, 0.0, 0.0));
        let mid = e.state_at(0.5).unwrap();
        assert!((mid.position.x() - 1.0).abs() < 1e-12);
        assert!((mid.orientation.yaw() - 0.2).abs() < 1e-12);
        assert!((mid.speed - 1.5).abs() < 1e-12);
        assert!(e.state_at(2.0).is_none());
    }
}
