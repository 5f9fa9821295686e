//! Spatial derivation: directional sectors, oriented-box distances, topology
//! relation sets and plan-view occlusion.
//!
//! All directional relations are anchored in the ego frame: the relation of
//! `a` with respect to `b` classifies the displacement `a - b` against the
//! ego heading, which keeps `left_of(a, b) ⇔ right_of(b, a)` exact even when
//! the two elements face different ways. Occlusion is computed in plan view;
//! heights only enter the `above`/`below` relations.

use crate::math::{wrap_angle, Mat3, Vec2, Vec3, PI};
use crate::model::{Element, ElementId, Extent};
use crate::params::GeometryParams;
use crate::vocab::{SpatialRelation, Visibility};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("snapshot timestamps differ: {0} vs {1}")]
    MismatchedSnapshot(f64, f64),
    #[error("viewpoint lies inside an occluder footprint")]
    DegenerateViewpoint,
    #[error("extent must be positive, got ({0}, {1}, {2})")]
    NonPositiveExtent(f64, f64, f64),
}

/// An oriented rectangle in plan view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub center: Vec2,
    pub half_length: f64,
    pub half_width: f64,
    pub heading: f64,
}

impl Footprint {
    pub fn new(center: Vec2, half_length: f64, half_width: f64, heading: f64) -> Self {
        Footprint {
            center,
            half_length,
            half_width,
            heading,
        }
    }

    /// Builds the footprint of an element pose plus occupancy extent.
    pub fn from_pose(position: &Vec3, orientation: &Mat3, extent: &Extent) -> Self {
        Footprint {
            center: Vec2::new(position.x(), position.y()),
            half_length: extent.length * 0.5,
            half_width: extent.width * 0.5,
            heading: orientation.yaw(),
        }
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let locals = [
            Vec2::new(self.half_length, self.half_width),
            Vec2::new(self.half_length, -self.half_width),
            Vec2::new(-self.half_length, -self.half_width),
            Vec2::new(-self.half_length, self.half_width),
        ];
        locals.map(|l| self.center.add(&l.rotate(self.heading)))
    }

    fn to_local(&self, p: &Vec2) -> Vec2 {
        p.sub(&self.center).rotate(-self.heading)
    }

    pub fn contains_point(&self, p: &Vec2) -> bool {
        let l = self.to_local(p);
        libm::fabs(l.x) <= self.half_length && libm::fabs(l.y) <= self.half_width
    }

    /// Exact distance from a point to this rectangle (0 inside).
    pub fn distance_to_point(&self, p: &Vec2) -> f64 {
        let l = self.to_local(p);
        let dx = (libm::fabs(l.x) - self.half_length).max(0.0);
        let dy = (libm::fabs(l.y) - self.half_width).max(0.0);
        libm::hypot(dx, dy)
    }

    /// Clips the segment `a + s·(b - a)`, `s ∈ [0, 1]`, against the rectangle.
    /// Returns the parameter range of the overlap, if any.
    pub fn clip_segment(&self, a: &Vec2, b: &Vec2) -> Option<(f64, f64)> {
        let p0 = self.to_local(a);
        let p1 = self.to_local(b);
        let d = p1.sub(&p0);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (start, delta, half) in [
            (p0.x, d.x, self.half_length),
            (p0.y, d.y, self.half_width),
        ] {
            if libm::fabs(delta) < 1e-15 {
                if libm::fabs(start) > half {
                    return None;
                }
                continue;
            }
            let mut ta = (-half - start) / delta;
            let mut tb = (half - start) / delta;
            if ta > tb {
                core::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// A footprint extruded over a height interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementBox {
    pub footprint: Footprint,
    pub z_min: f64,
    pub z_max: f64,
}

impl ElementBox {
    /// Boxes stand on their position: the z interval is `[z, z + height]`.
    pub fn from_pose(position: &Vec3, orientation: &Mat3, extent: &Extent) -> Self {
        ElementBox {
            footprint: Footprint::from_pose(position, orientation, extent),
            z_min: position.z(),
            z_max: position.z() + extent.height,
        }
    }

    fn z_gap(&self, other: &ElementBox) -> f64 {
        (self.z_min - other.z_max)
            .max(other.z_min - self.z_max)
            .max(0.0)
    }

    fn contains(&self, other: &ElementBox) -> bool {
        other.z_min >= self.z_min
            && other.z_max <= self.z_max
            && other
                .footprint
                .corners()
                .iter()
                .all(|c| self.footprint.contains_point(c))
    }
}

/// Classifies the direction of `target` as seen from `ref_position` against
/// `ref_heading`. Returns `None` when the two points planar-coincide (the
/// caller should fall back to `touching` with no direction).
///
/// Sector convention: bearing β relative to the heading; `front_of` for
/// |β| ≤ half-angle, `behind` for |β| ≥ π − half-angle, `left_of`/`right_of`
/// in between by sign. Exact boundary bearings fall to front/behind.
pub fn classify_directional_relation(
    ref_position: &Vec2,
    ref_heading: f64,
    target: &Vec2,
    params: &GeometryParams,
) -> Option<SpatialRelation> {
    let d = target.sub(ref_position);
    if d.norm() < params.coincident_eps {
        return None;
    }
    let half = params.sector_half_angle_deg.to_radians();
    let bearing = wrap_angle(libm::atan2(d.y, d.x) - ref_heading);
    let abs = libm::fabs(bearing);
    if abs <= half {
        Some(SpatialRelation::FrontOf)
    } else if abs >= PI - half {
        Some(SpatialRelation::Behind)
    } else if bearing > 0.0 {
        Some(SpatialRelation::LeftOf)
    } else {
        Some(SpatialRelation::RightOf)
    }
}

fn segment_segment_distance(a0: &Vec2, a1: &Vec2, b0: &Vec2, b1: &Vec2) -> f64 {
    fn point_segment(p: &Vec2, s0: &Vec2, s1: &Vec2) -> f64 {
        let d = s1.sub(s0);
        let len2 = d.dot(&d);
        let t = if len2 <= 0.0 {
            0.0
        } else {
            (p.sub(s0).dot(&d) / len2).clamp(0.0, 1.0)
        };
        p.sub(&s0.add(&d.scale(t))).norm()
    }

    let da = a1.sub(a0);
    let db = b1.sub(b0);
    let denom = da.cross(&db);
    if libm::fabs(denom) > 1e-15 {
        let diff = b0.sub(a0);
        let s = diff.cross(&db) / denom;
        let u = diff.cross(&da) / denom;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&u) {
            return 0.0;
        }
    }
    point_segment(a0, b0, b1)
        .min(point_segment(a1, b0, b1))
        .min(point_segment(b0, a0, a1))
        .min(point_segment(b1, a0, a1))
}

fn footprints_overlap(a: &Footprint, b: &Footprint) -> bool {
    // Separating-axis test on the four box axes.
    let ca = a.corners();
    let cb = b.corners();
    for (heading, corners_a, corners_b) in [(a.heading, &ca, &cb), (b.heading, &cb, &ca)] {
        for axis in [
            Vec2::new(libm::cos(heading), libm::sin(heading)),
            Vec2::new(-libm::sin(heading), libm::cos(heading)),
        ] {
            let project = |cs: &[Vec2; 4]| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for c in cs {
                    let v = c.dot(&axis);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (lo, hi)
            };
            let (a_lo, a_hi) = project(corners_a);
            let (b_lo, b_hi) = project(corners_b);
            if a_hi < b_lo || b_hi < a_lo {
                return false;
            }
        }
    }
    true
}

/// Minimum plan-view gap between two oriented rectangles (0 when overlapping).
pub fn footprint_distance(a: &Footprint, b: &Footprint) -> f64 {
    if footprints_overlap(a, b) {
        return 0.0;
    }
    let ca = a.corners();
    let cb = b.corners();
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let a0 = &ca[i];
        let a1 = &ca[(i + 1) % 4];
        for j in 0..4 {
            let b0 = &cb[j];
            let b1 = &cb[(j + 1) % 4];
            best = best.min(segment_segment_distance(a0, a1, b0, b1));
        }
    }
    best
}

/// Minimum Euclidean gap between two boxes; symmetric, 0 when overlapping.
pub fn surface_distance(a: &ElementBox, b: &ElementBox) -> f64 {
    let gap_xy = footprint_distance(&a.footprint, &b.footprint);
    let gap_z = a.z_gap(b);
    libm::hypot(gap_xy, gap_z)
}

/// Volume of a bounding extent.
pub fn occupancy_volume(extent: &Extent) -> Result<f64, GeometryError> {
    if !extent.is_positive() {
        return Err(GeometryError::NonPositiveExtent(
            extent.length,
            extent.width,
            extent.height,
        ));
    }
    Ok(extent.volume())
}

/// One element's pose at a common snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotElement {
    pub id: ElementId,
    pub t: f64,
    pub position: Vec3,
    pub orientation: Mat3,
    pub extent: Extent,
}

impl SnapshotElement {
    pub fn footprint(&self) -> Footprint {
        Footprint::from_pose(&self.position, &self.orientation, &self.extent)
    }

    pub fn element_box(&self) -> ElementBox {
        ElementBox::from_pose(&self.position, &self.orientation, &self.extent)
    }

    /// Interpolated snapshot of an element at `t`, when its trajectory covers it.
    pub fn of(element: &Element, extent: &Extent, t: f64) -> Option<SnapshotElement> {
        element.state_at(t).map(|s| SnapshotElement {
            id: element.id.clone(),
            t,
            position: s.position,
            orientation: s.orientation,
            extent: *extent,
        })
    }
}

/// Derives the pairwise topology sets across one snapshot. The returned map
/// carries, per element, the set of (other, relation-of-this-w.r.t.-other).
pub fn derive_topology(
    snapshot: &[SnapshotElement],
    ego_id: &ElementId,
    params: &GeometryParams,
) -> Result<BTreeMap<ElementId, BTreeSet<(ElementId, SpatialRelation)>>, GeometryError> {
    for w in snapshot.windows(2) {
        if w[0].t != w[1].t {
            return Err(GeometryError::MismatchedSnapshot(w[0].t, w[1].t));
        }
    }
    let ego_heading = snapshot
        .iter()
        .find(|e| &e.id == ego_id)
        .map(|e| e.orientation.yaw())
        .unwrap_or(0.0);

    let mut result: BTreeMap<ElementId, BTreeSet<(ElementId, SpatialRelation)>> = snapshot
        .iter()
        .map(|e| (e.id.clone(), BTreeSet::new()))
        .collect();

    for a in snapshot {
        for b in snapshot {
            if a.id == b.id {
                continue;
            }
            let set = result.get_mut(&a.id).expect("snapshot id registered");
            let box_a = a.element_box();
            let box_b = b.element_box();
            let gap = surface_distance(&box_a, &box_b);

            let a_xy = Vec2::new(a.position.x(), a.position.y());
            let b_xy = Vec2::new(b.position.x(), b.position.y());
            match classify_directional_relation(&b_xy, ego_heading, &a_xy, params) {
                Some(direction) => {
                    set.insert((b.id.clone(), direction));
                }
                None => {
                    set.insert((b.id.clone(), SpatialRelation::Touching));
                }
            }
            if gap <= params.touch_gap {
                set.insert((b.id.clone(), SpatialRelation::Touching));
            }
            if gap <= params.near_radius {
                set.insert((b.id.clone(), SpatialRelation::Near));
            }
            if box_a.contains(&box_b) {
                set.insert((b.id.clone(), SpatialRelation::Contains));
            }
            if box_b.contains(&box_a) {
                set.insert((b.id.clone(), SpatialRelation::ContainedBy));
            }
            let xy_overlap = footprints_overlap(&box_a.footprint, &box_b.footprint);
            if xy_overlap && box_a.z_min > box_b.z_max {
                set.insert((b.id.clone(), SpatialRelation::Above));
            }
            if xy_overlap && box_b.z_min > box_a.z_max {
                set.insert((b.id.clone(), SpatialRelation::Below));
            }
        }
    }
    Ok(result)
}

/// Casts sight rays from `ego` to the target's four footprint corners plus
/// centre. Full (`Occluded`) when every ray hits at least one occluder before
/// the sample point; `Visible` when none does. The fraction is blocked/5.
pub fn occlusion_state(
    ego: &Vec2,
    target: &Footprint,
    occluders: &[Footprint],
) -> Result<(Visibility, f64), GeometryError> {
    if occluders.iter().any(|o| o.contains_point(ego)) {
        return Err(GeometryError::DegenerateViewpoint);
    }
    let mut samples = Vec::with_capacity(5);
    samples.extend_from_slice(&target.corners());
    samples.push(target.center);

    let mut blocked = 0usize;
    for sample in &samples {
        let hit = occluders.iter().any(|o| {
            o.clip_segment(ego, sample)
                .map(|(t0, t1)| t1 > 1e-12 && t0 < 1.0 - 1e-12)
                .unwrap_or(false)
        });
        if hit {
            blocked += 1;
        }
    }
    let fraction = blocked as f64 / samples.len() as f64;
    let verdict = if blocked == samples.len() {
        Visibility::Occluded
    } else if blocked == 0 {
        Visibility::Visible
    } else {
        Visibility::Partial
    };
    Ok((verdict, fraction))
}
