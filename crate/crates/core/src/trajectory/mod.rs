//! Phase-segmented chopstick, hand, arm and object trajectories.
mod arm_ik;
mod bezier;
mod file;
mod phase;
mod task;
mod throw;

pub use arm_ik::{arm_fk, arm_ik, arm_ik_at, arm_track, reachable, swivel_angle, ArmIkSolution, MAX_JOINT_STEP, MAX_SWIVEL_STEP};
pub use bezier::{bernstein, bezier_position, bezier_tangent};
pub use file::{load_trajectory, parse_trajectory, to_sim_frames, write_trajectory, FRAME_COLUMNS, TRAJECTORY_FORMAT};
pub use phase::{optimize_phase, phase_objective, Environment, Phase, PhaseOptions, PhasePlan, PhiProfile};
pub use task::{
    assemble_task, phase_durations, throw_plan_for, ArmHint, Goal, PhaseSummary, TaskOptions, TaskRequest, TaskTrajectory, TrajFrame,
};
pub use throw::{plan_throw, release_point, throw_velocity, ThrowOptions, ThrowPlan};
