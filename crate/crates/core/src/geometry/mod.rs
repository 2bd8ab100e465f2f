//! Rigid-transform, quaternion and capsule-geometry primitives plus the
//! clamped log-barrier shared by the optimizers.

mod barrier;
mod quat;
mod shapes;

pub use barrier::{clog, clog_derivative, clog_smooth, BARRIER_FLOOR};
pub use quat::{axis_angle, canonical, quat_angle, quat_angle_raw, slerp};
pub use shapes::{
    box_sdf, capsule_distance, closest_segment_segment, point_segment_distance, Capsule, Contact,
    HalfSpace, OrientedBox, Shape, Sphere,
};

/// 3-vector in metres unless stated otherwise.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Rotation stored as a unit quaternion. Use [`canonical`] before comparing.
pub type Quat = nalgebra::UnitQuaternion<f64>;
/// Position + orientation.
pub type RigidTransform = nalgebra::Isometry3<f64>;

/// Builds a transform whose rotation is in canonical (w >= 0) form.
pub fn transform(position: Vec3, orientation: Quat) -> RigidTransform {
    RigidTransform::from_parts(position.into(), canonical(orientation))
}

/// Canonicalizes the rotation part of a transform.
pub fn canonical_transform(t: &RigidTransform) -> RigidTransform {
    RigidTransform::from_parts(t.translation, canonical(t.rotation))
}

/// Any unit vector orthogonal to `v` (which must be nonzero).
pub fn any_orthogonal(v: &Vec3) -> Vec3 {
    let n = v.normalize();
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    n.cross(&helper).normalize()
}
