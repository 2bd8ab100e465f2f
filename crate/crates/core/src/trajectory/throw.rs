use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrowOptions {
    /// Release height above the table (m).
    pub release_height: f64,
    pub flight_time: f64,
    pub gravity: f64,
    pub speed_cap: f64,
}

impl Default for ThrowOptions {
    fn default() -> Self {
        Self { release_height: 0.3, flight_time: 0.3, gravity: 9.81, speed_cap: 5.0 }
    }
}

/// Release velocity that carries a projectile from `release` to `target` in
/// `flight_time` seconds under gravity along -z.
pub fn throw_velocity(release: &Vec3, target: &Vec3, flight_time: f64, gravity: f64) -> Result<Vec3> {
    if !(flight_time > 0.0) {
        return Err(Error::Invalid(format!("flight time {flight_time} must be positive")));
    }
    let d = target - release;
    Ok(Vec3::new(d.x / flight_time, d.y / flight_time, (d.z + 0.5 * gravity * flight_time * flight_time) / flight_time))
}

/// Release point at the configured height on the boundary of the horizontal
/// rectangle `[lo, hi]`, along the ray from its centre towards `target`.
pub fn release_point(lo: &Vec3, hi: &Vec3, table_height: f64, target: &Vec3, opts: &ThrowOptions) -> Vec3 {
    let c = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    let d = Vec3::new(target.x - c.x, target.y - c.y, 0.0);
    let scale = [d.x.abs() / half.x.max(1e-12), d.y.abs() / half.y.max(1e-12)].into_iter().fold(0.0, f64::max);
    let xy = if scale > 1e-12 { c + d / scale } else { c };
    Vec3::new(xy.x, xy.y, table_height + opts.release_height)
}

/// Release point and velocity for a throw at `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrowPlan {
    pub release: Vec3,
    pub velocity: Vec3,
    pub flight_time: f64,
}

impl ThrowPlan {
    pub fn position_at(&self, t: f64, gravity: f64) -> Vec3 {
        self.release + self.velocity * t - Vec3::new(0.0, 0.0, 0.5 * gravity * t * t)
    }
}

pub fn plan_throw(release: Vec3, target: &Vec3, opts: &ThrowOptions) -> Result<ThrowPlan> {
    let velocity = throw_velocity(&release, target, opts.flight_time, opts.gravity)?;
    let speed = velocity.norm();
    if speed > opts.speed_cap {
        return Err(Error::ThrowInfeasible { speed, cap: opts.speed_cap });
    }
    Ok(ThrowPlan { release, velocity, flight_time: opts.flight_time })
}
