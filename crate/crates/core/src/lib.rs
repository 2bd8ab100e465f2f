//! Kinematic planning toolkit for chopstick manipulation with an articulated
//! hand: gripping styles, grip-pose optimization, grasp selection,
//! trajectory synthesis and tracking rewards.

pub mod bo;
pub mod chopsticks;
pub mod config;
pub mod error;
pub mod geometry;
pub mod grasp;
pub mod grip;
pub mod hand;
pub mod lbfgs;
pub mod object;
pub mod pipeline;
pub mod styles;
pub mod tracking;
pub mod trajectory;

pub use error::{Error, Result};
