//! Minimal 3D vector / rotation-matrix arithmetic used by the derivation engines.
//!
//! The model stores orientations as full rotation matrices; inputs usually give a
//! plan-view yaw angle which is lifted to a z-rotation on ingest.

use serde::{Deserialize, Serialize};

pub const PI: f64 = core::f64::consts::PI;
pub const TAU: f64 = 2.0 * core::f64::consts::PI;

/// A 3D vector in metres (or m/s, m/s² depending on context).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub f64, pub f64, pub f64);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3(0.0, 0.0, 0.0);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3(x, y, z)
    }

    pub fn x(&self) -> f64 {
        self.0
    }

    pub fn y(&self) -> f64 {
        self.1
    }

    pub fn z(&self) -> f64 {
        self.2
    }

    pub fn add(&self, o: &Vec3) -> Vec3 {
        Vec3(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }

    pub fn sub(&self, o: &Vec3) -> Vec3 {
        Vec3(self.0 - o.0, self.1 - o.1, self.2 - o.2)
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3(self.0 * s, self.1 * s, self.2 * s)
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.0 * o.0 + self.1 * o.1 + self.2 * o.2
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Euclidean norm of the xy projection.
    pub fn norm_xy(&self) -> f64 {
        libm::hypot(self.0, self.1)
    }

    pub fn lerp(&self, o: &Vec3, alpha: f64) -> Vec3 {
        self.add(&o.sub(self).scale(alpha))
    }
}

/// A plan-view point or direction in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn add(&self, o: &Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(&self, o: &Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(&self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    pub fn dot(&self, o: &Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(&self, o: &Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(&self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    /// Rotates by `angle` radians counter-clockwise.
    pub fn rotate(&self, angle: f64) -> Vec2 {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Row-major 3×3 matrix; the model only admits proper rotations (det +1, orthonormal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::IDENTITY
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Rotation about the vertical axis by `yaw` radians.
    pub fn from_yaw(yaw: f64) -> Mat3 {
        let (s, c) = (libm::sin(yaw), libm::cos(yaw));
        Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Plan-view heading of the body x-axis.
    pub fn yaw(&self) -> f64 {
        libm::atan2(self.0[1][0], self.0[0][0])
    }

    /// Body x-axis expressed in world coordinates.
    pub fn forward(&self) -> Vec3 {
        Vec3(self.0[0][0], self.0[1][0], self.0[2][0])
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        Vec3(
            m[0][0] * v.0 + m[0][1] * v.1 + m[0][2] * v.2,
            m[1][0] * v.0 + m[1][1] * v.1 + m[1][2] * v.2,
            m[2][0] * v.0 + m[2][1] * v.1 + m[2][2] * v.2,
        )
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let (a, b) = (&self.0, &o.0);
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Mat3(r)
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute deviation of `self·selfᵀ` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let p = self.mul(&self.transpose());
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                let d = libm::fabs(p.0[i][j] - want);
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Membership in SO(3) up to `tol`.
    pub fn is_rotation(&self, tol: f64) -> bool {
        self.orthonormality_defect() <= tol && libm::fabs(self.determinant() - 1.0) <= tol
    }

    /// Axis-angle logarithm, returned as axis·angle.
    pub fn log(&self) -> Vec3 {
        let m = &self.0;
        let trace = m[0][0] + m[1][1] + m[2][2];
        let cos_a = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
        let angle = libm::acos(cos_a);
        if angle < 1e-12 {
            return Vec3::ZERO;
        }
        if PI - angle < 1e-6 {
            // Near-pi rotation: recover the axis from the symmetric part.
            let xx = libm::sqrt(((m[0][0] + 1.0) * 0.5).max(0.0));
            let yy = libm::sqrt(((m[1][1] + 1.0) * 0.5).max(0.0));
            let zz = libm::sqrt(((m[2][2] + 1.0) * 0.5).max(0.0));
            let sx = if m[2][1] - m[1][2] >= 0.0 { 1.0 } else { -1.0 };
            let sy = if m[0][2] - m[2][0] >= 0.0 { 1.0 } else { -1.0 };
            let sz = if m[1][0] - m[0][1] >= 0.0 { 1.0 } else { -1.0 };
            return Vec3(sx * xx, sy * yy, sz * zz).scale(angle);
        }
        let k = angle / (2.0 * libm::sin(angle));
        Vec3(
            (m[2][1] - m[1][2]) * k,
            (m[0][2] - m[2][0]) * k,
            (m[1][0] - m[0][1]) * k,
        )
    }

    /// Rodrigues exponential of an axis·angle vector.
    pub fn exp(w: &Vec3) -> Mat3 {
        let angle = w.norm();
        if angle < 1e-12 {
            return Mat3::IDENTITY;
        }
        let axis = w.scale(1.0 / angle);
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let (x, y, z) = (axis.0, axis.1, axis.2);
        let one_c = 1.0 - c;
        Mat3([
            [
                c + x * x * one_c,
                x * y * one_c - z * s,
                x * z * one_c + y * s,
            ],
            [
                y * x * one_c + z * s,
                c + y * y * one_c,
                y * z * one_c - x * s,
            ],
            [
                z * x * one_c - y * s,
                z * y * one_c + x * s,
                c + z * z * one_c,
            ],
        ])
    }

    /// Spherical interpolation between two rotations.
    pub fn slerp(&self, other: &Mat3, alpha: f64) -> Mat3 {
        if alpha <= 0.0 {
            return *self;
        }
        if alpha >= 1.0 {
            return *other;
        }
        let rel = self.transpose().mul(other);
        self.mul(&Mat3::exp(&rel.log().scale(alpha)))
    }
}

/// Normalises an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = libm::fmod(a, TAU);
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yaw_round_trip() {
        for i in -8..=8 {
            let yaw = i as f64 * 0.4;
            let m = Mat3::from_yaw(yaw);
            assert!(m.is_rotation(1e-12));
            assert!(libm::fabs(wrap_angle(m.yaw() - yaw)) < 1e-12);
        }
    }

    #[test]
    fn log_exp_round_trip() {
        let m = Mat3::from_yaw(1.1).mul(&Mat3::exp(&Vec3(0.3, -0.2, 0.5)));
        let back = Mat3::exp(&m.log());
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.0[i][j] - back.0[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let a = Mat3::from_yaw(0.2);
        let b = Mat3::from_yaw(1.0);
        assert_eq!(a.slerp(&b, 0.0), a);
        assert_eq!(a.slerp(&b, 1.0), b);
        let mid = a.slerp(&b, 0.5);
        assert!((mid.yaw() - 0.6).abs() < 1e-9);
        assert!(mid.is_rotation(1e-9));
    }

    #[test]
    fn wrap_angle_range() {
        for i in -20..=20 {
            let a = i as f64 * 1.3;
            let w = wrap_angle(a);
            assert!(w > -PI - 1e-12 && w <= PI + 1e-12);
            assert!(libm::sin(w - a).abs() < 1e-9);
        }
    }
}
