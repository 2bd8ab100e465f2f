//! Tracking rewards and the controller observation vector.

mod reward;
mod state;

pub use reward::{reward, score_frames, RewardBreakdown, ScoreReport};
pub use state::{assemble_state, state_dimension, BodyState, ChopRate, SimFrame, LOOKAHEAD_FRAMES, LOOKAHEAD_STRIDE};
