//! Gripping poses: contact placement on the sticks and the barrier-penalized
//! IK that closes the fingers onto them.

mod ik;
mod pose;

pub use ik::{contact_points, ik_objective, solve_grip_ik, solve_grip_ik_from, GripProblem, IkOptions};
pub use pose::{load_pose, parse_pose, GripPose, POSE_FORMAT};
