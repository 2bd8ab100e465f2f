use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};
use crate::hand::HandModel;
use crate::styles::GrippingStyle;

pub const POSE_FORMAT: &str = "grip-pose/1";

/// Largest holding offset along the lower stick (m).
pub const MAX_HOLDING_OFFSET: f64 = 0.05;

/// A solved gripping pose.
#[derive(Debug, Clone, PartialEq)]
pub struct GripPose {
    pub hand: String,
    /// Full joint vector; the arm entries are unused.
    pub q: Vec<f64>,
    pub style: GrippingStyle,
    /// Contact fractions along the sticks, one per contacting finger.
    pub x: Vec<f64>,
    /// Contact points in the lower-stick frame.
    pub anchors: Vec<Vec3>,
    /// Translation of the pair along the lower-stick axis, towards the tips.
    pub holding_offset: f64,
    pub grip_phi: f64,
    pub residuals: Vec<f64>,
    pub penetration: f64,
}

impl GripPose {
    /// Lower-stick frame in palm coordinates, including the holding offset.
    pub fn sticks_in_palm(&self, model: &HandModel) -> RigidTransform {
        model.grip.chopsticks * RigidTransform::translation(0.0, 0.0, -self.holding_offset)
    }

    /// Palm (hand root) transform that places the lower stick at `lower`.
    pub fn hand_root(&self, model: &HandModel, lower: &RigidTransform) -> RigidTransform {
        lower * self.sticks_in_palm(model).inverse()
    }

    pub fn with_holding_offset(mut self, h: f64) -> Result<Self> {
        if !(h.abs() <= MAX_HOLDING_OFFSET) {
            return Err(Error::Invalid(format!("holding offset {h} outside ±{MAX_HOLDING_OFFSET} m")));
        }
        self.holding_offset = h;
        Ok(self)
    }

    /// Hand joint entries only.
    pub fn hand_q(&self) -> &[f64] {
        &self.q[crate::hand::ARM_DOFS..]
    }

    pub fn to_toml(&self) -> String {
        let f = PoseFile {
            format: POSE_FORMAT.into(),
            hand: self.hand.clone(),
            style: self.style.0.clone(),
            x: self.x.clone(),
            holding_offset: self.holding_offset,
            grip_phi: self.grip_phi,
            q: self.q.clone(),
            anchors: self.anchors.iter().map(|a| [a.x, a.y, a.z]).collect(),
            residuals: self.residuals.clone(),
            penetration: self.penetration,
        };
        toml::to_string(&f).expect("pose serializes")
    }

    pub fn check_model(&self, model: &HandModel) -> Result<()> {
        if self.q.len() != model.dof_count() {
            return Err(Error::Dimension { expected: model.dof_count(), got: self.q.len() });
        }
        if self.style.finger_count() != model.finger_count() {
            return Err(Error::Invalid(format!("pose style {} does not fit hand '{}'", self.style, model.name)));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PoseFile {
    format: String,
    hand: String,
    style: Vec<u8>,
    x: Vec<f64>,
    holding_offset: f64,
    grip_phi: f64,
    q: Vec<f64>,
    anchors: Vec<[f64; 3]>,
    residuals: Vec<f64>,
    penetration: f64,
}

pub fn parse_pose(text: &str) -> Result<GripPose> {
    let f: PoseFile = toml::from_str(text).map_err(|e| crate::config::toml_error(text, &e))?;
    if f.format != POSE_FORMAT {
        return Err(Error::Invalid(format!("unsupported pose format '{}'", f.format)));
    }
    let style = GrippingStyle(f.style);
    if style.0.iter().any(|&v| v > 2) {
        return Err(Error::Invalid(format!("bad style {style}")));
    }
    if f.x.len() != style.contacting().len() || f.anchors.len() != f.x.len() {
        return Err(Error::Invalid("contact count does not match the style".into()));
    }
    let pose = GripPose {
        hand: f.hand,
        q: f.q,
        style,
        x: f.x,
        anchors: f.anchors.into_iter().map(Vec3::from).collect(),
        holding_offset: 0.0,
        grip_phi: f.grip_phi,
        residuals: f.residuals,
        penetration: f.penetration,
    };
    pose.with_holding_offset(f.holding_offset)
}

pub fn load_pose(path: impl AsRef<Path>) -> Result<GripPose> {
    parse_pose(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GripPose {
        GripPose {
            hand: "standard".into(),
            q: vec![0.1, -0.2, 1.0 / 3.0],
            style: GrippingStyle::standard(),
            x: vec![0.5, 0.25, 0.125, 0.7],
            anchors: vec![Vec3::new(0.1, 0.2, 0.3); 4],
            holding_offset: 0.02,
            grip_phi: 0.1,
            residuals: vec![1e-4; 4],
            penetration: 0.0,
        }
    }

    #[test]
    fn roundtrip() {
        let p = sample();
        assert_eq!(parse_pose(&p.to_toml()).unwrap(), p);
    }

    #[test]
    fn offset_range() {
        assert!(sample().with_holding_offset(0.06).is_err());
        assert!(sample().with_holding_offset(-0.05).is_ok());
        let text = sample().to_toml().replace("holding_offset = 0.02", "holding_offset = 0.2");
        assert!(parse_pose(&text).is_err());
    }
}
