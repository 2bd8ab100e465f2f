use std::f64::consts::PI;

use nalgebra::UnitQuaternion;

use crate::geometry::{canonical, quat_angle, Quat, Vec3};

/// Splits `n` into yaw, pitch and roll counts with product `n`, as close to
/// the 2:1:1 shape as the divisors allow.
pub fn grid_shape(n: usize) -> (usize, usize, usize) {
    let mut best = (n.max(1), 1, 1);
    let mut best_cost = f64::INFINITY;
    let n = n.max(1);
    for b in 1..=n {
        if !n.is_multiple_of(b) {
            continue;
        }
        for c in 1..=b {
            if !(n / b).is_multiple_of(c) {
                continue;
            }
            let a = n / b / c;
            let cost = (a as f64 / (2.0 * b as f64)).ln().abs() + (b as f64 / c as f64).ln().abs();
            if cost < best_cost - 1e-12 {
                best_cost = cost;
                best = (a, b, c);
            }
        }
    }
    best
}

/// Orientation from yaw (z), pitch (y) and roll (x) angles.
pub fn euler_orientation(yaw: f64, pitch: f64, roll: f64) -> Quat {
    canonical(
        UnitQuaternion::from_axis_angle(&Vec3::z_axis(), yaw)
            * UnitQuaternion::from_axis_angle(&Vec3::y_axis(), pitch)
            * UnitQuaternion::from_axis_angle(&Vec3::x_axis(), roll),
    )
}

fn wrapped(i: usize, n: usize) -> f64 {
    let a = 2.0 * PI * i as f64 / n as f64;
    if a >= PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Grid angles of entry `index`: yaw and roll on full turns starting at 0,
/// pitch at cell centres of `(-pi/2, pi/2)` so the poles are never hit.
pub fn grid_angles(n: usize, index: usize) -> (f64, f64, f64) {
    let (a, b, c) = grid_shape(n);
    let (i, rest) = (index / (b * c), index % (b * c));
    let (j, k) = (rest / c, rest % c);
    (wrapped(i, a), -PI / 2.0 + (j as f64 + 0.5) * PI / b as f64, wrapped(k, c))
}

/// `n` orientations, yaw-major, in the frame they will be composed with.
pub fn discretize_orientations(n: usize) -> Vec<Quat> {
    (0..n.max(1))
        .map(|i| {
            let (y, p, r) = grid_angles(n, i);
            euler_orientation(y, p, r)
        })
        .collect()
}

/// Index of the grid orientation closest to `q`.
pub fn nearest_index(grid: &[Quat], q: &Quat) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, g) in grid.iter().enumerate() {
        let d = quat_angle(g, q);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        assert_eq!(grid_shape(2000), (20, 10, 10));
        assert_eq!(grid_shape(1), (1, 1, 1));
        assert_eq!(grid_shape(7), (7, 1, 1));
        let (a, b, c) = grid_shape(360);
        assert_eq!(a * b * c, 360);
    }

    #[test]
    fn two_thousand_unique() {
        let g = discretize_orientations(2000);
        assert_eq!(g.len(), 2000);
        let mut min = f64::INFINITY;
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                min = min.min(quat_angle(&g[i], &g[j]));
            }
        }
        assert!(min > 1e-3, "{min}");
    }

    #[test]
    fn single_entry_is_identity() {
        let g = discretize_orientations(1);
        assert!(quat_angle(&g[0], &Quat::identity()) < 1e-15);
    }

    #[test]
    fn snapping_finds_members() {
        let g = discretize_orientations(2000);
        for i in [0, 17, 999, 1999] {
            assert_eq!(nearest_index(&g, &g[i]), i);
        }
    }
}
