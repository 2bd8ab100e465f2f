use crate::geometry::Vec3;

/// Cubic Bernstein weights at `t`.
pub fn bernstein(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t]
}

pub fn bezier_position(t: f64, p0: &Vec3, q1: &Vec3, q2: &Vec3, p3: &Vec3) -> Vec3 {
    let b = bernstein(t);
    p0 * b[0] + q1 * b[1] + q2 * b[2] + p3 * b[3]
}

/// Derivative with respect to `t`.
pub fn bezier_tangent(t: f64, p0: &Vec3, q1: &Vec3, q2: &Vec3, p3: &Vec3) -> Vec3 {
    let s = 1.0 - t;
    (q1 - p0) * (3.0 * s * s) + (q2 - q1) * (6.0 * s * t) + (p3 - q2) * (3.0 * t * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let (p0, q1, q2, p3) = (Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(bezier_position(0.0, &p0, &q1, &q2, &p3), p0);
        assert_eq!(bezier_position(1.0, &p0, &q1, &q2, &p3), p3);
        assert!((bezier_position(0.5, &p0, &q1, &q2, &p3) - Vec3::new(0.5, 0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tangent_matches_difference() {
        let (p0, q1, q2, p3) = (Vec3::new(0.1, 0.2, 0.0), Vec3::new(0.4, 1.0, 0.3), Vec3::new(1.0, -1.0, 0.0), Vec3::new(1.0, 0.0, 2.0));
        for t in [0.0f64, 0.3, 0.7, 1.0] {
            let h = 1e-7;
            let a = bezier_position((t - h).max(0.0f64), &p0, &q1, &q2, &p3);
            let b = bezier_position((t + h).min(1.0f64), &p0, &q1, &q2, &p3);
            let fd = (b - a) / ((t + h).min(1.0f64) - (t - h).max(0.0f64));
            assert!((fd - bezier_tangent(t, &p0, &q1, &q2, &p3)).norm() < 1e-5);
        }
    }

    #[test]
    fn collinear_thirds_are_a_straight_segment() {
        let p0 = Vec3::new(0.0, 0.0, 0.0);
        let p3 = Vec3::new(0.3, 0.0, 0.0);
        let (q1, q2) = (p3 / 3.0, p3 * 2.0 / 3.0);
        let n = 1000;
        let len: f64 = (0..n)
            .map(|k| {
                let a = bezier_position(k as f64 / n as f64, &p0, &q1, &q2, &p3);
                let b = bezier_position((k + 1) as f64 / n as f64, &p0, &q1, &q2, &p3);
                (b - a).norm()
            })
            .sum();
        assert!((len - 0.3).abs() < 1e-12);
    }
}
