//! Graspable rigid primitives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Capsule, OrientedBox, RigidTransform, Shape, Sphere, Vec3};

/// Primitive geometry in its local frame. Capsules run along local z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Primitive {
    Sphere { radius: f64 },
    /// `length` is the axis segment length, excluding the end caps.
    Capsule { radius: f64, length: f64 },
    /// Full side lengths.
    Box { size: [f64; 3] },
}

impl Primitive {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Primitive::Sphere { radius } => radius > 0.0,
            Primitive::Capsule { radius, length } => radius > 0.0 && length >= 0.0,
            Primitive::Box { size } => size.iter().all(|s| *s > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("nonpositive object dimensions: {self:?}")))
        }
    }

    /// Warnings for sizes outside the tested ranges.
    pub fn range_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let mut check = |what: &str, v: f64, lo: f64, hi: f64| {
            if v < lo - 1e-12 || v > hi + 1e-12 {
                w.push(format!("{what} {v} m outside tested range [{lo}, {hi}] m"));
            }
        };
        match *self {
            Primitive::Sphere { radius } => check("sphere radius", radius, 0.005, 0.01),
            Primitive::Capsule { radius, length } => {
                check("capsule radius", radius, 0.005, 0.01);
                check("capsule length", length, 0.02, 0.04);
            }
            Primitive::Box { size } => {
                for s in size {
                    check("box side", s, 0.01, 0.02);
                }
            }
        }
        w
    }

    /// Shape kind one-hot followed by up to three size parameters.
    pub fn descriptor(&self) -> [f64; 6] {
        match *self {
            Primitive::Sphere { radius } => [1.0, 0.0, 0.0, radius, 0.0, 0.0],
            Primitive::Capsule { radius, length } => [0.0, 1.0, 0.0, radius, length, 0.0],
            Primitive::Box { size } => [0.0, 0.0, 1.0, size[0], size[1], size[2]],
        }
    }

    /// Radius of a sphere enclosing the primitive.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Primitive::Sphere { radius } => radius,
            Primitive::Capsule { radius, length } => radius + 0.5 * length,
            Primitive::Box { size } => 0.5 * Vec3::from(size).norm(),
        }
    }

    /// Signed distance at a local point.
    pub fn sdf_local(&self, p: &Vec3) -> f64 {
        match *self {
            Primitive::Sphere { radius } => p.norm() - radius,
            Primitive::Capsule { radius, length } => {
                let h = 0.5 * length;
                let z = p.z.clamp(-h, h);
                (p - Vec3::new(0.0, 0.0, z)).norm() - radius
            }
            Primitive::Box { size } => crate::geometry::box_sdf(p, &(0.5 * Vec3::from(size))).0,
        }
    }

    /// Outward unit normal at (or nearest to) a local point.
    pub fn normal_local(&self, p: &Vec3) -> Vec3 {
        let radial = |v: Vec3| if v.norm() > 1e-15 { v.normalize() } else { Vec3::z() };
        match *self {
            Primitive::Sphere { .. } => radial(*p),
            Primitive::Capsule { length, .. } => {
                let h = 0.5 * length;
                radial(p - Vec3::new(0.0, 0.0, p.z.clamp(-h, h)))
            }
            Primitive::Box { size } => crate::geometry::box_sdf(p, &(0.5 * Vec3::from(size))).1,
        }
    }
}

/// A primitive placed in the world.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidObject {
    pub id: String,
    pub primitive: Primitive,
    pub pose: RigidTransform,
}

impl RigidObject {
    pub fn new(id: impl Into<String>, primitive: Primitive, pose: RigidTransform) -> Self {
        Self { id: id.into(), primitive, pose }
    }

    pub fn center(&self) -> Vec3 {
        self.pose.translation.vector
    }

    pub fn at(&self, pose: RigidTransform) -> Self {
        Self { pose, ..self.clone() }
    }

    /// Collision geometry in the world.
    pub fn shape(&self) -> Shape {
        match self.primitive {
            Primitive::Sphere { radius } => Shape::Sphere(Sphere { center: self.center(), radius }),
            Primitive::Capsule { radius, length } => Shape::Capsule(Capsule::new(0.5 * length, radius, self.pose)),
            Primitive::Box { size } => Shape::Box(OrientedBox { half_extents: 0.5 * Vec3::from(size), frame: self.pose }),
        }
    }

    pub fn sdf(&self, p: &Vec3) -> f64 {
        self.primitive.sdf_local(&self.pose.inverse_transform_point(&(*p).into()).coords)
    }

    pub fn normal(&self, p: &Vec3) -> Vec3 {
        let local = self.pose.inverse_transform_point(&(*p).into()).coords;
        self.pose.rotation * self.primitive.normal_local(&local)
    }

    /// Distance from the centre to the surface along the unit direction `d`.
    pub fn radius_along(&self, d: &Vec3) -> f64 {
        let c = self.center();
        let r = self.primitive.bounding_radius() * 1.01 + 1e-9;
        exit_param(|t| self.sdf(&(c + d * t)), 0.0, r)
    }

    /// Chord through the centre along `d` (the primitives are symmetric).
    pub fn width_along(&self, d: &Vec3) -> f64 {
        2.0 * self.radius_along(d)
    }

    /// Entry and exit parameters of the line `origin + t d` (unit `d`), if it
    /// meets the object.
    pub fn line_hits(&self, origin: &Vec3, d: &Vec3) -> Option<(f64, f64)> {
        let c = self.center();
        let r = self.primitive.bounding_radius() * 1.01 + 1e-9;
        // closest approach to the centre splits the line into two monotone halves
        let t0 = (c - origin).dot(d);
        let f = |t: f64| self.sdf(&(origin + d * t));
        let (mut lo, mut hi) = (t0 - r, t0 + r);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..80 {
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
        let tm = 0.5 * (lo + hi);
        if f(tm) > 0.0 {
            return None;
        }
        let exit = exit_param(f, tm, t0 + r);
        let entry = exit_param(|t| f(-t), -tm, -(t0 - r));
        Some((-entry, exit))
    }
}

/// Bisection for the sign change of `f` on `[inside, outside]`.
fn exit_param<F: Fn(f64) -> f64>(f: F, inside: f64, outside: f64) -> f64 {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}
