use serde::{Deserialize, Serialize};

use super::{any_orthogonal, RigidTransform, Vec3};

const EPS: f64 = 1e-14;

/// Capsule whose axis is the local z axis of `frame`, centred on its origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub half_length: f64,
    pub radius: f64,
    pub frame: RigidTransform,
}

impl Capsule {
    pub fn new(half_length: f64, radius: f64, frame: RigidTransform) -> Self {
        debug_assert!(radius > 0.0 && half_length >= 0.0);
        Self { half_length, radius, frame }
    }

    /// Capsule spanning the segment `a`-`b`.
    pub fn from_segment(a: Vec3, b: Vec3, radius: f64) -> Self {
        let axis = b - a;
        let len = axis.norm();
        let rot = if len > EPS {
            nalgebra::UnitQuaternion::rotation_between(&Vec3::z(), &axis)
                .unwrap_or_else(|| nalgebra::UnitQuaternion::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI))
        } else {
            nalgebra::UnitQuaternion::identity()
        };
        let center = 0.5 * (a + b);
        Self::new(0.5 * len, radius, RigidTransform::from_parts(center.into(), rot))
    }

    /// World-space endpoints of the axis segment.
    pub fn segment(&self) -> (Vec3, Vec3) {
        let axis = self.frame.rotation * Vec3::new(0.0, 0.0, self.half_length);
        let c = self.frame.translation.vector;
        (c - axis, c + axis)
    }

    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self { frame: t * self.frame, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Box with half extents along the local axes of `frame`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub half_extents: Vec3,
    pub frame: RigidTransform,
}

impl OrientedBox {
    /// Signed distance and outward unit gradient at a world point.
    pub fn sdf(&self, p: &Vec3) -> (f64, Vec3) {
        let local = self.frame.inverse_transform_point(&(*p).into()).coords;
        let (d, g) = box_sdf(&local, &self.half_extents);
        (d, self.frame.rotation * g)
    }
}

/// Everything below `height` along +z is solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub height: f64,
}

/// Obstacle primitives a capsule can be tested against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere(Sphere),
    Capsule(Capsule),
    Box(OrientedBox),
    HalfSpace(HalfSpace),
}

/// Result of a signed-distance query between a capsule and another shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    /// Surface distance; negative values are penetration depth.
    pub distance: f64,
    /// Closest point on the capsule surface.
    pub point_a: Vec3,
    /// Closest point on the other surface.
    pub point_b: Vec3,
    /// Unit direction from the other shape towards the capsule. Moving the
    /// capsule by `dx` changes `distance` by `normal . dx` to first order.
    pub normal: Vec3,
}

/// Closest points between segments `p1-q1` and `p2-q2`.
///
/// Returns the segment parameters and the points themselves.
pub fn closest_segment_segment(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> (f64, f64, Vec3, Vec3) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return (0.0, 0.0, *p1, *p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s0 = if denom > EPS * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    (s, t, p1 + d1 * s, p2 + d2 * t)
}

/// Distance from `p` to segment `a-b`, the segment parameter and closest point.
pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> (f64, f64, Vec3) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 <= EPS { 0.0 } else { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) };
    let c = a + ab * t;
    ((p - c).norm(), t, c)
}

fn contact_from_axis_points(ca: Vec3, ra: f64, cb: Vec3, rb: f64, fallback_axis: &Vec3) -> Contact {
    let delta = ca - cb;
    let len = delta.norm();
    let normal = if len > 1e-12 { delta / len } else { any_orthogonal(fallback_axis) };
    Contact {
        distance: len - ra - rb,
        point_a: ca - normal * ra,
        point_b: cb + normal * rb,
        normal,
    }
}

/// Signed surface distance between two capsules with closest surface points.
pub fn capsule_distance(a: &Capsule, b: &Capsule) -> Contact {
    let (a0, a1) = a.segment();
    let (b0, b1) = b.segment();
    let (_, _, ca, cb) = closest_segment_segment(&a0, &a1, &b0, &b1);
    let axis = if (a1 - a0).norm() > EPS { a1 - a0 } else { Vec3::z() };
    contact_from_axis_points(ca, a.radius, cb, b.radius, &axis)
}

fn capsule_sphere(a: &Capsule, s: &Sphere) -> Contact {
    let (a0, a1) = a.segment();
    let (_, _, ca) = point_segment_distance(&s.center, &a0, &a1);
    let axis = if (a1 - a0).norm() > EPS { a1 - a0 } else { Vec3::z() };
    contact_from_axis_points(ca, a.radius, s.center, s.radius, &axis)
}

fn capsule_halfspace(a: &Capsule, h: &HalfSpace) -> Contact {
    let (a0, a1) = a.segment();
    let low = if a0.z <= a1.z { a0 } else { a1 };
    let normal = Vec3::z();
    Contact {
        distance: low.z - h.height - a.radius,
        point_a: low - normal * a.radius,
        point_b: Vec3::new(low.x, low.y, h.height),
        normal,
    }
}

/// Signed distance and outward gradient of an axis-aligned box centred at the
/// origin with half extents `half`.
pub fn box_sdf(p: &Vec3, half: &Vec3) -> (f64, Vec3) {
    let q = p.abs() - half;
    let outside = q.map(|v| v.max(0.0));
    let out_len = outside.norm();
    let sign = p.map(|v| if v < 0.0 { -1.0 } else { 1.0 });
    if out_len > 0.0 {
        let g = outside.component_mul(&sign) / out_len;
        (out_len, g)
    } else {
        let (mut axis, mut best) = (0, q.x);
        for i in 1..3 {
            if q[i] > best {
                best = q[i];
                axis = i;
            }
        }
        let mut g = Vec3::zeros();
        g[axis] = sign[axis];
        (best, g)
    }
}

fn capsule_box(a: &Capsule, b: &OrientedBox) -> Contact {
    let (a0, a1) = a.segment();
    let p0 = b.frame.inverse_transform_point(&a0.into()).coords;
    let p1 = b.frame.inverse_transform_point(&a1.into()).coords;
    // The signed distance of a convex set is convex along a line. The tiny
    // quadratic breaks ties on flat stretches towards the segment middle.
    let f = |t: f64| box_sdf(&(p0 + (p1 - p0) * t), &b.half_extents).0 + 1e-9 * (t - 0.5).powi(2);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..90 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut t = 0.5 * (lo + hi);
    let exact = |t: f64| box_sdf(&(p0 + (p1 - p0) * t), &b.half_extents).0;
    for cand in [0.0, 1.0] {
        if exact(cand) < exact(t) {
            t = cand;
        }
    }
    let local = p0 + (p1 - p0) * t;
    let (d, grad_local) = box_sdf(&local, &b.half_extents);
    let normal = b.frame.rotation * grad_local;
    let axis_pt = a0 + (a1 - a0) * t;
    Contact {
        distance: d - a.radius,
        point_a: axis_pt - normal * a.radius,
        point_b: axis_pt - normal * d,
        normal,
    }
}

impl Shape {
    /// Signed distance from `capsule` to this shape.
    pub fn distance_to_capsule(&self, capsule: &Capsule) -> Contact {
        match self {
            Shape::Sphere(s) => capsule_sphere(capsule, s),
            Shape::Capsule(c) => capsule_distance(capsule, c),
            Shape::Box(b) => capsule_box(capsule, b),
            Shape::HalfSpace(h) => capsule_halfspace(capsule, h),
        }
    }

    /// Signed distance from a point to the surface.
    pub fn point_distance(&self, p: &Vec3) -> f64 {
        match self {
            Shape::Sphere(s) => (p - s.center).norm() - s.radius,
            Shape::Capsule(c) => {
                let (a, b) = c.segment();
                point_segment_distance(p, &a, &b).0 - c.radius
            }
            Shape::Box(b) => b.sdf(p).0,
            Shape::HalfSpace(h) => p.z - h.height,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::axis_angle;

    fn seg_capsule(a: [f64; 3], b: [f64; 3], r: f64) -> Capsule {
        Capsule::from_segment(Vec3::from(a), Vec3::from(b), r)
    }

    #[test]
    fn parallel_capsules() {
        let a = seg_capsule([0.0, 0.0, -0.5], [0.0, 0.0, 0.5], 0.1);
        let b = seg_capsule([0.5, 0.0, -0.5], [0.5, 0.0, 0.5], 0.1);
        let c = capsule_distance(&a, &b);
        assert!((c.distance - 0.3).abs() < 1e-12);
        assert!((c.normal + Vec3::x()).norm() < 1e-12);
    }

    #[test]
    fn coincident_capsules_fully_overlap() {
        let a = seg_capsule([0.0, 0.0, -0.5], [0.0, 0.0, 0.5], 0.1);
        let b = seg_capsule([0.0, 0.0, -0.5], [0.0, 0.0, 0.5], 0.2);
        let c = capsule_distance(&a, &b);
        assert!((c.distance + 0.3).abs() < 1e-12);
        assert!((c.normal.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_capsules() {
        let a = seg_capsule([-0.1, 0.0, 0.0], [0.1, 0.0, 0.0], 0.004);
        let b = seg_capsule([0.0, -0.1, 0.01], [0.0, 0.1, 0.01], 0.004);
        assert!((capsule_distance(&a, &b).distance - 0.002).abs() < 1e-12);
    }

    #[test]
    fn capsule_from_segment_roundtrip() {
        let c = seg_capsule([0.1, 0.2, 0.3], [-0.4, 0.5, 0.0], 0.01);
        let (a, b) = c.segment();
        assert!((a - Vec3::new(0.1, 0.2, 0.3)).norm() < 1e-12);
        assert!((b - Vec3::new(-0.4, 0.5, 0.0)).norm() < 1e-12);
        let down = seg_capsule([0.0, 0.0, 1.0], [0.0, 0.0, -1.0], 0.01);
        let (a, _) = down.segment();
        assert!((a - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn capsule_box_face_and_edge() {
        let b = OrientedBox { half_extents: Vec3::new(0.01, 0.02, 0.03), frame: RigidTransform::identity() };
        let over = seg_capsule([-0.1, 0.0, 0.05], [0.1, 0.0, 0.05], 0.005);
        let c = Shape::Box(b).distance_to_capsule(&over);
        assert!((c.distance - 0.015).abs() < 1e-9);
        assert!((c.normal - Vec3::z()).norm() < 1e-9);

        let through = seg_capsule([-0.1, 0.0, 0.0], [0.1, 0.0, 0.0], 0.005);
        let c = Shape::Box(b).distance_to_capsule(&through);
        // deepest axis point is the centre: sdf = -0.01
        assert!((c.distance + 0.015).abs() < 1e-9, "{}", c.distance);

        let rotated = OrientedBox {
            half_extents: Vec3::new(0.01, 0.01, 0.01),
            frame: RigidTransform::from_parts(Vec3::new(0.0, 0.0, 0.0).into(), axis_angle(&Vec3::z(), 0.7)),
        };
        let far = seg_capsule([0.2, -0.1, 0.0], [0.2, 0.1, 0.0], 0.001);
        let c = Shape::Box(rotated).distance_to_capsule(&far);
        assert!(c.distance > 0.0 && c.distance < 0.2);
    }

    #[test]
    fn halfspace_uses_lowest_endpoint() {
        let c = seg_capsule([0.0, 0.0, 0.02], [0.1, 0.0, 0.3], 0.004);
        let d = Shape::HalfSpace(HalfSpace { height: 0.0 }).distance_to_capsule(&c);
        assert!((d.distance - 0.016).abs() < 1e-12);
    }
}
