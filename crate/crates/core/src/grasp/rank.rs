use std::cmp::Ordering;

use rand::Rng;

use super::grid::discretize_orientations;
use super::pso::{pso_refine, quality_at, PsoOptions};
use super::quality::{continuity_score, QualityWeights};
use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::error::{Error, Result};
use crate::geometry::{Quat, Vec3};
use crate::grip::GripPose;
use crate::hand::HandModel;
use crate::object::RigidObject;
use crate::trajectory::{reachable, Environment};

/// Axis-aligned operating cuboid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workspace {
    pub min: Vec3,
    pub max: Vec3,
}

impl Default for Workspace {
    fn default() -> Self {
        Self { min: Vec3::new(-0.25, -0.25, 0.0), max: Vec3::new(0.25, 0.25, 0.25) }
    }
}

impl Workspace {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspCandidate {
    pub config: ChopstickConfig,
    /// Entry of the orientation grid, if the candidate is a grid member.
    pub grid_index: Option<usize>,
    pub quality: f64,
    pub reachable: f64,
    pub continuity: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOptions {
    pub grid_size: usize,
    /// Candidates kept by quality before reachability is checked.
    pub keep: usize,
    pub weights: QualityWeights,
    pub pso: PsoOptions,
    pub workspace: Workspace,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { grid_size: 2000, keep: 10, weights: QualityWeights::default(), pso: PsoOptions::default(), workspace: Workspace::default() }
    }
}

/// True when an arm solution exists for the hand pose that holds the sticks
/// at `config`, and the sticks clear every obstacle.
pub fn reachability(config: &ChopstickConfig, grip: &GripPose, model: &HandModel, env: &Environment) -> bool {
    let spec = ChopstickSpec::default();
    if env.min_clearance(&spec, std::slice::from_ref(config)) < 0.0 {
        return false;
    }
    reachable(model, &grip.hand_root(model, &config.lower_frame()))
}

/// Quality order with near-equal qualities (within 1e-9) treated as ties,
/// which are broken by continuity and then grid index.
fn quality_order(a: &GraspCandidate, b: &GraspCandidate) -> Ordering {
    let key = |c: &GraspCandidate| (c.quality * 1e9).round() as i64;
    key(b).cmp(&key(a)).then(b.continuity.total_cmp(&a.continuity)).then(a.grid_index.cmp(&b.grid_index))
}

/// Keeps the `keep` best candidates by quality.
pub fn select_by_quality(mut candidates: Vec<GraspCandidate>, keep: usize) -> Vec<GraspCandidate> {
    candidates.sort_by(quality_order);
    candidates.truncate(keep);
    candidates
}

/// Sorts by total score, best first, with the same tie-breaks.
pub fn order_by_total(candidates: &mut [GraspCandidate]) {
    candidates.sort_by(|a, b| {
        b.total.total_cmp(&a.total).then(b.continuity.total_cmp(&a.continuity)).then(a.grid_index.cmp(&b.grid_index))
    });
}

/// Scores the orientation grid (plus swarm refinements snapped onto it),
/// keeps the best by quality, weights them by reachability and continuity
/// with `current`, and returns them best first.
pub fn rank_grasps<R: Rng>(
    object: &RigidObject,
    grip: &GripPose,
    model: &HandModel,
    current: &Quat,
    env: &Environment,
    opts: &RankOptions,
    rng: &mut R,
) -> Result<Vec<GraspCandidate>> {
    if !opts.workspace.contains(&object.center()) {
        return Err(Error::NoReachableGrasp { candidates: 0 });
    }
    let spec = ChopstickSpec::default();
    let grid = discretize_orientations(opts.grid_size);
    let mut scored: Vec<Option<GraspCandidate>> = grid
        .iter()
        .enumerate()
        .map(|(i, local)| {
            let o = object.pose.rotation * local;
            let (config, quality) = quality_at(&o, object, &spec, &opts.weights);
            config.map(|config| GraspCandidate {
                config,
                grid_index: Some(i),
                quality,
                reachable: 0.0,
                continuity: continuity_score(&config.orientation, current),
                total: 0.0,
            })
        })
        .collect();
    // refinements land on grid members; keep the better of the two scores
    for r in pso_refine(object, &spec, &opts.weights, &grid, &opts.pso, rng) {
        if let Some(c) = scored[r.grid_index].as_mut() {
            c.quality = c.quality.max(r.snapped_quality);
        }
    }
    let pool: Vec<GraspCandidate> = scored.into_iter().flatten().collect();
    if pool.is_empty() {
        return Err(Error::NoReachableGrasp { candidates: 0 });
    }
    let mut kept = select_by_quality(pool, opts.keep);
    for c in kept.iter_mut() {
        c.reachable = if reachability(&c.config, grip, model, env) { 1.0 } else { 0.0 };
        c.total = c.quality * c.reachable * c.continuity;
    }
    order_by_total(&mut kept);
    if kept[0].total <= 0.0 {
        return Err(Error::NoReachableGrasp { candidates: kept.len() });
    }
    Ok(kept)
}
