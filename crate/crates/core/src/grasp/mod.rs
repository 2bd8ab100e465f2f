//! Grasp selection: an orientation grid, width-matched configurations,
//! quality scoring, swarm refinement, reachability and continuity.
mod grid;
mod pso;
mod quality;
mod rank;

pub use grid::{discretize_orientations, euler_orientation, grid_angles, grid_shape, nearest_index};
pub use pso::{pso_refine, quality_at, PsoOptions, RefinedGrasp};
pub use quality::{complete_config, continuity_score, grasp_quality, opening_direction, quality_from_terms, QualityWeights};
pub use rank::{order_by_total, rank_grasps, reachability, select_by_quality, GraspCandidate, RankOptions, Workspace};
