//! Planner tunables loaded from TOML. Every key is optional; missing keys
//! keep their defaults.
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bo::{BoOptions, KinematicEvaluator};
use crate::error::{Error, Result};
use crate::grasp::{PsoOptions, QualityWeights, RankOptions};
use crate::grip::IkOptions;
use crate::trajectory::{PhaseOptions, TaskOptions, ThrowOptions};

/// Converts a TOML error into a parse error carrying a 1-based line.
pub(crate) fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(0);
    Error::Parse { line, message: e.message().to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspSection {
    pub w_midpoint: f64,
    pub w_alignment: f64,
    pub grid_size: usize,
    pub keep: usize,
    pub swarms: usize,
    pub particles: usize,
    pub iterations: usize,
}

impl Default for GraspSection {
    fn default() -> Self {
        let w = QualityWeights::default();
        let r = RankOptions::default();
        let p = PsoOptions::default();
        Self {
            w_midpoint: w.midpoint,
            w_alignment: w.alignment,
            grid_size: r.grid_size,
            keep: r.keep,
            swarms: p.swarms,
            particles: p.particles,
            iterations: p.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkSection {
    pub z0: f64,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub penetration_tol: f64,
    pub grip_phi: f64,
}

impl Default for IkSection {
    fn default() -> Self {
        let o = IkOptions::default();
        Self { z0: o.z0, max_iters: o.max_iters, residual_tol: o.residual_tol, penetration_tol: o.penetration_tol, grip_phi: o.grip_phi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub speed: f64,
    pub dt: f64,
    pub z0: f64,
    pub starts: usize,
    pub max_iters: usize,
    pub penetration_tol: f64,
    pub close_ramp: f64,
    pub release_ramp: f64,
    pub open_margin: f64,
    pub retreat: f64,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        let t = TaskOptions::default();
        let p = t.phase;
        Self {
            speed: p.speed,
            dt: p.dt,
            z0: p.z0,
            starts: p.starts,
            max_iters: p.max_iters,
            penetration_tol: p.penetration_tol,
            close_ramp: t.close_ramp,
            release_ramp: t.release_ramp,
            open_margin: t.open_margin,
            retreat: t.retreat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThrowSection {
    pub release_height: f64,
    pub flight_time: f64,
    pub gravity: f64,
    pub speed_cap: f64,
}

impl Default for ThrowSection {
    fn default() -> Self {
        let t = ThrowOptions::default();
        Self { release_height: t.release_height, flight_time: t.flight_time, gravity: t.gravity, speed_cap: t.speed_cap }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoSection {
    pub iterations: usize,
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    /// Residual (m) that ends a maneuver run during grip scoring.
    pub divergence: f64,
}

impl Default for BoSection {
    fn default() -> Self {
        let b = BoOptions::default();
        Self {
            iterations: b.iterations,
            lengthscale: b.kernel.lengthscales[0],
            signal_variance: b.kernel.signal_variance,
            noise_variance: b.kernel.noise_variance,
            divergence: KinematicEvaluator::default().divergence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub grasp: GraspSection,
    pub ik: IkSection,
    pub trajectory: TrajectorySection,
    pub throw: ThrowSection,
    pub bo: BoSection,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be positive, got {v}")))
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grasp;
        positive("grasp.w_midpoint", g.w_midpoint)?;
        positive("grasp.w_alignment", g.w_alignment)?;
        if g.grid_size == 0 || g.keep == 0 {
            return Err(Error::Invalid("grasp.grid_size and grasp.keep must be at least 1".into()));
        }
        let t = &self.trajectory;
        for (n, v) in [("trajectory.speed", t.speed), ("trajectory.dt", t.dt), ("trajectory.z0", t.z0), ("ik.z0", self.ik.z0)] {
            positive(n, v)?;
        }
        for (n, v) in [("throw.flight_time", self.throw.flight_time), ("throw.gravity", self.throw.gravity), ("throw.speed_cap", self.throw.speed_cap)] {
            positive(n, v)?;
        }
        for (n, v) in [("bo.lengthscale", self.bo.lengthscale), ("bo.signal_variance", self.bo.signal_variance), ("bo.noise_variance", self.bo.noise_variance)] {
            positive(n, v)?;
        }
        Ok(())
    }

    pub fn quality_weights(&self) -> QualityWeights {
        QualityWeights { midpoint: self.grasp.w_midpoint, alignment: self.grasp.w_alignment }
    }

    pub fn rank_options(&self) -> RankOptions {
        let g = &self.grasp;
        RankOptions {
            grid_size: g.grid_size,
            keep: g.keep,
            weights: self.quality_weights(),
            pso: PsoOptions { swarms: g.swarms, particles: g.particles, iterations: g.iterations, ..PsoOptions::default() },
            ..RankOptions::default()
        }
    }

    pub fn ik_options(&self) -> IkOptions {
        let i = &self.ik;
        IkOptions { z0: i.z0, max_iters: i.max_iters, residual_tol: i.residual_tol, penetration_tol: i.penetration_tol, grip_phi: i.grip_phi, ..IkOptions::default() }
    }

    pub fn task_options(&self) -> TaskOptions {
        let t = &self.trajectory;
        let w = &self.throw;
        TaskOptions {
            phase: PhaseOptions { speed: t.speed, dt: t.dt, z0: t.z0, starts: t.starts, max_iters: t.max_iters, penetration_tol: t.penetration_tol },
            close_ramp: t.close_ramp,
            release_ramp: t.release_ramp,
            open_margin: t.open_margin,
            retreat: t.retreat,
            throw: ThrowOptions { release_height: w.release_height, flight_time: w.flight_time, gravity: w.gravity, speed_cap: w.speed_cap },
        }
    }

    pub fn bo_options(&self) -> BoOptions {
        let mut o = BoOptions { iterations: self.bo.iterations, ..BoOptions::default() };
        o.kernel.lengthscales = vec![self.bo.lengthscale];
        o.kernel.signal_variance = self.bo.signal_variance;
        o.kernel.noise_variance = self.bo.noise_variance;
        o
    }

    pub fn evaluator(&self) -> KinematicEvaluator {
        let d = KinematicEvaluator::default();
        KinematicEvaluator { ik: IkOptions { max_iters: d.ik.max_iters, ..self.ik_options() }, divergence: self.bo.divergence, ..d }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn parse_config(text: &str) -> Result<PlannerConfig> {
    let c: PlannerConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    c.validate()?;
    Ok(c)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<PlannerConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
