//! Chopstick pair geometry. The lower stick's frame has its origin at the tip
//! and local z pointing to the rear end; the upper stick is the lower one
//! rotated by the opening angle about the pivot's local x axis.

use nalgebra::Translation3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{transform, Capsule, Quat, RigidTransform, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChopstickSpec {
    pub length: f64,
    pub radius: f64,
    /// Distance from the tips to the opening pivot.
    pub pivot_to_tip: f64,
    pub phi_max: f64,
}

impl Default for ChopstickSpec {
    fn default() -> Self {
        Self { length: 0.26, radius: 0.004, pivot_to_tip: 0.2, phi_max: 0.6 }
    }
}

impl ChopstickSpec {
    pub fn max_separation(&self) -> f64 {
        2.0 * self.pivot_to_tip * (self.phi_max / 2.0).sin()
    }

    pub fn separation(&self, phi: f64) -> f64 {
        2.0 * self.pivot_to_tip * (phi / 2.0).sin()
    }

    /// Opening angle giving tip separation `width`.
    pub fn phi_for_separation(&self, width: f64) -> Result<f64> {
        if width < 0.0 || !width.is_finite() {
            return Err(Error::Domain(format!("tip separation must be nonnegative, got {width}")));
        }
        if width > self.max_separation() {
            return Err(Error::ObjectTooWide { required: width, max: self.max_separation() });
        }
        Ok(2.0 * (width / (2.0 * self.pivot_to_tip)).asin())
    }

    /// Upper-stick frame relative to the lower-stick frame.
    pub fn upper_relative(&self, phi: f64) -> RigidTransform {
        let pivot = Vec3::new(0.0, 0.0, self.pivot_to_tip);
        let rot = RigidTransform::from_parts(Translation3::identity(), Quat::from_axis_angle(&Vec3::x_axis(), phi));
        RigidTransform::from_parts(pivot.into(), Quat::identity()) * rot * RigidTransform::from_parts((-pivot).into(), Quat::identity())
    }

    /// Capsule of one stick given its tip frame.
    pub fn capsule(&self, frame: &RigidTransform) -> Capsule {
        let a = frame.translation.vector;
        let b = frame.transform_point(&Vec3::new(0.0, 0.0, self.length).into()).coords;
        Capsule::from_segment(a, b, self.radius)
    }
}

/// Style value 1 is the upper stick, 2 the lower.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stick {
    Upper,
    Lower,
}

impl Stick {
    pub fn from_style(v: u8) -> Option<Self> {
        match v {
            1 => Some(Stick::Upper),
            2 => Some(Stick::Lower),
            _ => None,
        }
    }
}

/// Parallel-gripper view of the pair: lower-stick tip pose plus opening angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChopstickConfig {
    pub position: Vec3,
    pub orientation: Quat,
    pub phi: f64,
}

impl ChopstickConfig {
    pub fn new(position: Vec3, orientation: Quat, phi: f64) -> Self {
        Self { position, orientation: crate::geometry::canonical(orientation), phi }
    }

    pub fn from_frame(frame: &RigidTransform, phi: f64) -> Self {
        Self::new(frame.translation.vector, frame.rotation, phi)
    }

    pub fn lower_frame(&self) -> RigidTransform {
        transform(self.position, self.orientation)
    }

    pub fn upper_frame(&self, spec: &ChopstickSpec) -> RigidTransform {
        self.lower_frame() * spec.upper_relative(self.phi)
    }

    pub fn stick_frame(&self, spec: &ChopstickSpec, stick: Stick) -> RigidTransform {
        match stick {
            Stick::Upper => self.upper_frame(spec),
            Stick::Lower => self.lower_frame(),
        }
    }

    /// (upper tip, lower tip).
    pub fn tips(&self, spec: &ChopstickSpec) -> (Vec3, Vec3) {
        (self.upper_frame(spec).translation.vector, self.position)
    }

    pub fn tip_midpoint(&self, spec: &ChopstickSpec) -> Vec3 {
        let (u, l) = self.tips(spec);
        0.5 * (u + l)
    }

    /// (upper, lower) capsules.
    pub fn capsules(&self, spec: &ChopstickSpec) -> [Capsule; 2] {
        [spec.capsule(&self.upper_frame(spec)), spec.capsule(&self.lower_frame())]
    }

    /// Frame at the tip midpoint, oriented like the lower stick. Grasped
    /// objects ride along with it.
    pub fn tip_frame(&self, spec: &ChopstickSpec) -> RigidTransform {
        transform(self.tip_midpoint(spec), self.orientation)
    }
}

/// Point on the surface of `stick` at arclength fraction `x`, on the side
/// facing away from `palm_center`: finger pads press the sticks towards the
/// palm. All inputs share one coordinate frame.
pub fn contact_point(spec: &ChopstickSpec, stick_frame: &RigidTransform, x: f64, palm_center: &Vec3) -> Vec3 {
    let axis_pt = stick_frame.transform_point(&Vec3::new(0.0, 0.0, x * spec.length).into()).coords;
    let u = stick_frame.rotation * Vec3::z();
    let w = axis_pt - palm_center;
    let perp = w - u * w.dot(&u);
    let dir = if perp.norm() > 1e-12 { perp.normalize() } else { crate::geometry::any_orthogonal(&u) };
    axis_pt + dir * spec.radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::axis_angle;

    #[test]
    fn separation_matches_tip_fk() {
        let spec = ChopstickSpec::default();
        for phi in [0.0, 0.05, 0.2, 0.5] {
            let c = ChopstickConfig::new(Vec3::new(0.1, 0.2, 0.3), axis_angle(&Vec3::new(1.0, 2.0, 0.5), 0.8), phi);
            let (u, l) = c.tips(&spec);
            assert!(((u - l).norm() - spec.separation(phi)).abs() < 1e-12);
        }
        let phi = spec.phi_for_separation(0.01).unwrap();
        assert!((phi - 2.0 * (0.01f64 / 0.4).asin()).abs() < 1e-15);
        assert!((phi - 0.05000).abs() < 1e-5);
        assert_eq!(spec.phi_for_separation(0.0).unwrap(), 0.0);
        assert!(matches!(spec.phi_for_separation(0.5), Err(Error::ObjectTooWide { .. })));
    }

    #[test]
    fn pivot_is_fixed() {
        let spec = ChopstickSpec::default();
        let c = ChopstickConfig::new(Vec3::zeros(), Quat::identity(), 0.3);
        let p = Vec3::new(0.0, 0.0, spec.pivot_to_tip);
        let up = c.upper_frame(&spec).transform_point(&p.into()).coords;
        assert!((up - p).norm() < 1e-12);
    }

    #[test]
    fn contact_points_along_stick() {
        let spec = ChopstickSpec::default();
        let f = RigidTransform::identity();
        let center = Vec3::new(-0.05, 0.0, 0.1);
        let p0 = contact_point(&spec, &f, 0.0, &center);
        assert!((p0 - Vec3::new(spec.radius, 0.0, 0.0)).norm() < 1e-12);
        let mid = contact_point(&spec, &f, 0.5, &center);
        assert!((mid.z - 0.13).abs() < 1e-12);
        let rear = contact_point(&spec, &f, 1.0, &center);
        assert!((rear.z - 0.26).abs() < 1e-12);
    }
}
