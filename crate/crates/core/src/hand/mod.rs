//! Articulated hand + arm model: forward kinematics, morphology files,
//! fingertip geometry and the PD servo law.

mod model;
mod morphology;
mod pd;
mod presets;

pub use model::{Finger, FkResult, GripFrame, HandModel, Joint, Link, ARM_DOFS};
pub use morphology::{load_morphology, morphology_hash, parse_morphology, MorphologyFile, MORPHOLOGY_FORMAT};
pub use pd::{pd_torque, PDGains, Torque, GAINS_FORMAT};
pub use presets::{preset, PRESET_NAMES};
