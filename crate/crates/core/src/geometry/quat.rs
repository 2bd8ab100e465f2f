use nalgebra::{Quaternion, Unit};

use super::{Quat, Vec3};

/// Flips the sign so that `w >= 0`. Both signs describe the same rotation.
pub fn canonical(q: Quat) -> Quat {
    if q.w < 0.0 {
        Unit::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

/// Rotation of `angle` radians about `axis`, in canonical form.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Quat {
    canonical(Quat::from_axis_angle(&Unit::new_normalize(*axis), angle))
}

/// Absolute rotation angle between two orientations, in `[0, pi]`.
///
/// `q` and `-q` are the same rotation and give zero.
pub fn quat_angle(a: &Quat, b: &Quat) -> f64 {
    // chord form: exact zero for equal inputs and well conditioned near zero
    let (a, b) = (a.as_ref().coords, b.as_ref().coords);
    let b = if a.dot(&b) < 0.0 { -b } else { b };
    4.0 * (a - b).norm().atan2((a + b).norm())
}

/// [`quat_angle`] on raw quaternions, normalizing (with a warning) when the
/// inputs are not unit length.
pub fn quat_angle_raw(a: Quaternion<f64>, b: Quaternion<f64>) -> f64 {
    let normed = |q: Quaternion<f64>| {
        let n = q.norm();
        if (n - 1.0).abs() > 1e-9 {
            log::warn!("non-unit quaternion (norm {n}) normalized before angle evaluation");
        }
        Unit::new_normalize(q)
    };
    quat_angle(&normed(a), &normed(b))
}

/// Constant angular-speed interpolation along the shorter arc.
pub fn slerp(a: &Quat, b: &Quat, t: f64) -> Quat {
    if t <= 0.0 {
        return *a;
    }
    if t >= 1.0 {
        return *b;
    }
    let qa = a.into_inner();
    let mut qb = b.into_inner();
    if qa.dot(&qb) < 0.0 {
        qb = -qb;
    }
    let diff = qa - qb;
    let sum = qa + qb;
    // half the angle between the two 4-vectors
    let half = 2.0 * diff.norm().atan2(sum.norm());
    let out = if half < 1e-12 {
        qa * (1.0 - t) + qb * t
    } else {
        let s = half.sin();
        qa * (((1.0 - t) * half).sin() / s) + qb * ((t * half).sin() / s)
    };
    canonical(Unit::new_normalize(out))
}
