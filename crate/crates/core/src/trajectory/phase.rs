use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::bezier::{bernstein, bezier_position, bezier_tangent};
use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::error::{Error, Result};
use crate::geometry::{clog_smooth, slerp, Capsule, Shape, Vec3};
use crate::lbfgs::{minimize, LbfgsOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Approach,
    Relocate,
    Release,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Approach, Phase::Relocate, Phase::Release];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Approach => "approach",
            Phase::Relocate => "relocate",
            Phase::Release => "release",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phase::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::Invalid(format!("unknown phase '{s}'")))
    }
}

/// Piecewise-linear opening angle over phase time (s); constant outside the
/// keyframes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiProfile {
    pub keys: Vec<(f64, f64)>,
}

impl PhiProfile {
    pub fn constant(phi: f64) -> Self {
        Self { keys: vec![(0.0, phi)] }
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = &self.keys;
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((t0, a), (t1, b)) = (w[0], w[1]);
            if t <= t1 {
                return if t1 > t0 { a + (b - a) * (t - t0) / (t1 - t0) } else { b };
            }
        }
        k[k.len() - 1].1
    }
}

/// Tunables for phase planning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Nominal chopstick speed (m/s) used to turn displacement into time.
    pub speed: f64,
    pub dt: f64,
    /// Barrier threshold on chopstick clearance (m).
    pub z0: f64,
    pub starts: usize,
    pub max_iters: usize,
    /// Largest penetration accepted in a finished plan (m).
    pub penetration_tol: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self { speed: 0.25, dt: 0.01, z0: 0.001, starts: 5, max_iters: 200, penetration_tol: 0.001 }
    }
}

/// One phase: a cubic Bezier for the lower-stick reference point, a slerp for
/// its orientation and an opening-angle profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan {
    pub phase: Phase,
    pub start: ChopstickConfig,
    pub end: ChopstickConfig,
    pub q1: Vec3,
    pub q2: Vec3,
    /// Seconds; always a whole number of samples.
    pub duration: f64,
    pub phi: PhiProfile,
    /// Keep `q2` fixed while optimizing (used to impose an end velocity).
    pub fixed_q2: bool,
}

impl PhasePlan {
    /// Straight-line plan with duration `max(displacement / speed, min_duration)`
    /// rounded up to whole samples.
    pub fn new(phase: Phase, start: ChopstickConfig, end: ChopstickConfig, phi: PhiProfile, min_duration: f64, opts: &PhaseOptions) -> Self {
        let d = (end.position - start.position).norm();
        let raw = (d / opts.speed).max(min_duration);
        let mut plan = Self {
            phase,
            start,
            end,
            q1: start.position + (end.position - start.position) / 3.0,
            q2: start.position + (end.position - start.position) * (2.0 / 3.0),
            duration: 0.0,
            phi,
            fixed_q2: false,
        };
        plan.set_duration(raw, opts.dt);
        plan
    }

    /// Sets the duration, rounded up to whole samples of `dt`.
    pub fn set_duration(&mut self, seconds: f64, dt: f64) {
        let n = (seconds / dt - 1e-9).ceil().max(0.0);
        self.duration = n * dt;
    }

    /// Number of sample intervals.
    pub fn intervals(&self, dt: f64) -> usize {
        (self.duration / dt).round() as usize
    }

    pub fn position(&self, s: f64) -> Vec3 {
        bezier_position(s, &self.start.position, &self.q1, &self.q2, &self.end.position)
    }

    /// Velocity (m/s) at parameter `s`.
    pub fn velocity(&self, s: f64) -> Vec3 {
        if self.duration <= 0.0 {
            return Vec3::zeros();
        }
        bezier_tangent(s, &self.start.position, &self.q1, &self.q2, &self.end.position) / self.duration
    }

    pub fn config_at(&self, s: f64, time: f64) -> ChopstickConfig {
        ChopstickConfig::new(self.position(s), slerp(&self.start.orientation, &self.end.orientation, s), self.phi.at(time))
    }

    /// Configurations at every sample, both ends included.
    pub fn sample(&self, dt: f64) -> Vec<ChopstickConfig> {
        let n = self.intervals(dt);
        if n == 0 {
            return vec![self.config_at(1.0, 0.0)];
        }
        (0..=n).map(|k| self.config_at(k as f64 / n as f64, k as f64 * dt)).collect()
    }

    /// Polyline length through the samples.
    pub fn arc_length(&self, dt: f64) -> f64 {
        let n = self.intervals(dt).max(1);
        (0..n).map(|k| (self.position((k + 1) as f64 / n as f64) - self.position(k as f64 / n as f64)).norm()).sum()
    }

    /// The free control points as passed to [`phase_objective`].
    pub fn unknowns(&self) -> Vec<f64> {
        let mut x = self.q1.as_slice().to_vec();
        if !self.fixed_q2 {
            x.extend_from_slice(self.q2.as_slice());
        }
        x
    }

    fn with_unknowns(&self, x: &[f64]) -> Self {
        let mut p = self.clone();
        p.q1 = Vec3::new(x[0], x[1], x[2]);
        if !self.fixed_q2 {
            p.q2 = Vec3::new(x[3], x[4], x[5]);
        }
        p
    }
}

/// Static obstacles for the chopsticks.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    pub obstacles: Vec<Shape>,
}

fn bounding_sphere(s: &Shape) -> Option<(Vec3, f64)> {
    match s {
        Shape::Sphere(s) => Some((s.center, s.radius)),
        Shape::Capsule(c) => Some((c.frame.translation.vector, c.half_length + c.radius)),
        Shape::Box(b) => Some((b.frame.translation.vector, b.half_extents.norm())),
        Shape::HalfSpace(_) => None,
    }
}

impl Environment {
    /// Calls `visit(distance, normal)` for every obstacle within `reach` of
    /// the capsule.
    fn contacts(&self, cap: &Capsule, reach: f64, mut visit: impl FnMut(f64, Vec3)) {
        let center = cap.frame.translation.vector;
        let extent = cap.half_length + cap.radius;
        for o in &self.obstacles {
            if let Some((c, r)) = bounding_sphere(o) {
                if (c - center).norm() - r - extent > reach {
                    continue;
                }
            }
            let contact = o.distance_to_capsule(cap);
            visit(contact.distance, contact.normal);
        }
    }

    /// Smallest signed clearance of the two sticks over `configs`.
    pub fn min_clearance(&self, spec: &ChopstickSpec, configs: &[ChopstickConfig]) -> f64 {
        let mut best = f64::INFINITY;
        for c in configs {
            for cap in c.capsules(spec) {
                self.contacts(&cap, f64::INFINITY, |d, _| best = best.min(d));
            }
        }
        best
    }
}

/// Arc length plus clearance barriers over the samples. `x` holds `q1` (and
/// `q2` unless fixed); the gradient is written to `grad` when given.
pub fn phase_objective(
    plan: &PhasePlan,
    env: &Environment,
    spec: &ChopstickSpec,
    opts: &PhaseOptions,
    x: &[f64],
    grad: Option<&mut [f64]>,
) -> f64 {
    let p = plan.with_unknowns(x);
    let n = p.intervals(opts.dt).max(1);
    let mut g = [Vec3::zeros(); 2];
    let mut value = 0.0;
    let mut prev = p.position(0.0);
    let mut prev_b = bernstein(0.0);
    for k in 1..=n {
        let s = k as f64 / n as f64;
        let cur = p.position(s);
        let b = bernstein(s);
        let diff = cur - prev;
        let len = diff.norm();
        value += len;
        if len > 1e-15 {
            let u = diff / len;
            g[0] += u * (b[1] - prev_b[1]);
            g[1] += u * (b[2] - prev_b[2]);
        }
        prev = cur;
        prev_b = b;
    }
    for k in 0..=n {
        let s = k as f64 / n as f64;
        let b = bernstein(s);
        let config = p.config_at(s, k as f64 * opts.dt);
        for cap in config.capsules(spec) {
            env.contacts(&cap, opts.z0, |d, normal| {
                if d < opts.z0 {
                    let (v, slope) = clog_smooth(d, opts.z0);
                    value += v;
                    g[0] += normal * (slope * b[1]);
                    g[1] += normal * (slope * b[2]);
                }
            });
        }
    }
    if let Some(out) = grad {
        out[..3].copy_from_slice(g[0].as_slice());
        if !plan.fixed_q2 {
            out[3..6].copy_from_slice(g[1].as_slice());
        }
    }
    value
}

/// Shortest collision-free path between the phase endpoints: L-BFGS from the
/// straight-line controls and `starts - 1` random perturbations of them.
pub fn optimize_phase<R: Rng>(
    plan: &PhasePlan,
    env: &Environment,
    spec: &ChopstickSpec,
    opts: &PhaseOptions,
    rng: &mut R,
) -> Result<PhasePlan> {
    let samples = plan.sample(opts.dt);
    if plan.intervals(opts.dt) == 0 || (plan.end.position - plan.start.position).norm() < 1e-12 && env.obstacles.is_empty() {
        let worst = -env.min_clearance(spec, &samples);
        if worst >= opts.penetration_tol {
            return Err(Error::PlanningFailure { worst_penetration: worst });
        }
        return Ok(plan.clone());
    }
    let x0 = plan.unknowns();
    let scale = 0.5 * (plan.end.position - plan.start.position).norm() + 0.02;
    let noise = Normal::new(0.0, scale).expect("positive scale");
    let lopts = LbfgsOptions { max_iters: opts.max_iters, grad_tol: 1e-10, ..LbfgsOptions::default() };
    let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); x0.len()];
    let mut best: Option<(f64, PhasePlan)> = None;
    let mut least_bad = f64::INFINITY;
    for start in 0..opts.starts.max(1) {
        let init: Vec<f64> = if start == 0 { x0.clone() } else { x0.iter().map(|v| v + noise.sample(rng)).collect() };
        let r = minimize(|x, g| phase_objective(plan, env, spec, opts, x, Some(g)), &init, &bounds, &lopts);
        let cand = plan.with_unknowns(&r.x);
        let worst = -env.min_clearance(spec, &cand.sample(opts.dt));
        log::debug!("{} start {start}: objective {:.6}, worst penetration {worst:.2e}", plan.phase, r.f);
        if worst < opts.penetration_tol {
            if best.as_ref().is_none_or(|(f, _)| r.f < *f) {
                best = Some((r.f, cand));
            }
        } else {
            least_bad = least_bad.min(worst);
        }
    }
    best.map(|(_, p)| p).ok_or(Error::PlanningFailure { worst_penetration: least_bad })
}
