use std::f64::consts::PI;

use rand::Rng;

use super::grid::{euler_orientation, nearest_index};
use super::quality::{complete_config, grasp_quality, QualityWeights};
use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::geometry::Quat;
use crate::object::RigidObject;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoOptions {
    pub swarms: usize,
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoOptions {
    fn default() -> Self {
        Self { swarms: 10, particles: 20, iterations: 50, inertia: 0.72, cognitive: 1.49, social: 1.49 }
    }
}

/// Best configuration of one swarm and its nearest grid neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedGrasp {
    pub continuous: ChopstickConfig,
    pub continuous_quality: f64,
    pub grid_index: usize,
    pub snapped: ChopstickConfig,
    pub snapped_quality: f64,
}

const LO: [f64; 3] = [-PI, -PI / 2.0, -PI];
const HI: [f64; 3] = [PI, PI / 2.0, PI];

/// World orientation for object-frame Euler angles.
fn orientation(object: &RigidObject, x: &[f64; 3]) -> Quat {
    object.pose.rotation * euler_orientation(x[0], x[1], x[2])
}

/// Quality of the completed configuration at `o`; zero when the object does
/// not fit between the tips.
pub fn quality_at(o: &Quat, object: &RigidObject, spec: &ChopstickSpec, w: &QualityWeights) -> (Option<ChopstickConfig>, f64) {
    match complete_config(o, object, spec) {
        Ok(c) => {
            let q = grasp_quality(&c, object, spec, w);
            (Some(c), q)
        }
        Err(_) => (None, 0.0),
    }
}

/// Independent particle swarms over yaw, pitch and roll in the object frame.
/// `grid` holds object-frame orientations used for snapping.
pub fn pso_refine<R: Rng>(
    object: &RigidObject,
    spec: &ChopstickSpec,
    weights: &QualityWeights,
    grid: &[Quat],
    opts: &PsoOptions,
    rng: &mut R,
) -> Vec<RefinedGrasp> {
    let eval = |x: &[f64; 3]| quality_at(&orientation(object, x), object, spec, weights).1;
    let mut out = Vec::with_capacity(opts.swarms);
    for _ in 0..opts.swarms {
        let mut pos: Vec<[f64; 3]> = (0..opts.particles).map(|_| std::array::from_fn(|d| rng.random_range(LO[d]..HI[d]))).collect();
        let mut vel: Vec<[f64; 3]> =
            (0..opts.particles).map(|_| std::array::from_fn(|d| 0.1 * (HI[d] - LO[d]) * rng.random_range(-1.0..1.0))).collect();
        let mut best_pos = pos.clone();
        let mut best_val: Vec<f64> = pos.iter().map(eval).collect();
        let mut g = 0;
        for i in 1..opts.particles {
            if best_val[i] > best_val[g] {
                g = i;
            }
        }
        for _ in 0..opts.iterations {
            let gbest = best_pos[g];
            for i in 0..opts.particles {
                for d in 0..3 {
                    let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                    vel[i][d] = opts.inertia * vel[i][d]
                        + opts.cognitive * r1 * (best_pos[i][d] - pos[i][d])
                        + opts.social * r2 * (gbest[d] - pos[i][d]);
                    pos[i][d] = (pos[i][d] + vel[i][d]).clamp(LO[d], HI[d]);
                }
                let v = eval(&pos[i]);
                if v > best_val[i] {
                    best_val[i] = v;
                    best_pos[i] = pos[i];
                    if v > best_val[g] {
                        g = i;
                    }
                }
            }
        }
        let x = best_pos[g];
        let local = euler_orientation(x[0], x[1], x[2]);
        let (cont, cont_q) = quality_at(&(object.pose.rotation * local), object, spec, weights);
        let index = nearest_index(grid, &local);
        let (snap, snap_q) = quality_at(&(object.pose.rotation * grid[index]), object, spec, weights);
        let fallback = ChopstickConfig::new(object.center(), object.pose.rotation * local, 0.0);
        out.push(RefinedGrasp {
            continuous: cont.unwrap_or(fallback),
            continuous_quality: cont_q,
            grid_index: index,
            snapped: snap.unwrap_or(ChopstickConfig { orientation: object.pose.rotation * grid[index], ..fallback }),
            snapped_quality: snap_q,
        });
    }
    out
}
