use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Quaternion, Unit};
use serde::{Deserialize, Serialize};

use super::model::{Finger, GripFrame, HandModel, Joint, Link, WRIST};
use crate::error::{Error, Result};
use crate::geometry::{canonical, Quat, RigidTransform, Vec3};

pub const MORPHOLOGY_FORMAT: &str = "morphology/1";

/// On-disk hand description. Hand joints hang off the implicit arm; the
/// name `palm` refers to the wrist frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphologyFile {
    pub format: String,
    pub name: String,
    pub arm: ArmSpec,
    pub palm: PalmSpec,
    pub grip: GripSpec,
    pub fingers: Vec<FingerSpec>,
    pub joints: Vec<JointSpec>,
    pub links: Vec<LinkSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub shoulder_position: [f64; 3],
    /// `[w, x, y, z]`
    pub shoulder_rotation: [f64; 4],
    pub upper_arm: f64,
    pub forearm: f64,
    pub radius: f64,
    /// Shoulder z, y, x; elbow z; wrist x, y, z.
    pub limits: Vec<[f64; 2]>,
    pub rest: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalmSpec {
    pub end: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripSpec {
    pub chopstick_position: [f64; 3],
    pub chopstick_rotation: [f64; 4],
    pub palm_center: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerSpec {
    pub name: String,
    pub tip: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub name: String,
    pub parent: String,
    pub origin: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[f64; 4]>,
    pub axes: Vec<[f64; 3]>,
    pub limits: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub name: String,
    pub end: [f64; 3],
    pub radius: f64,
}

fn quat(q: [f64; 4], what: &str) -> Result<Quat> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    if !(raw.norm() > 1e-9) {
        return Err(Error::Morphology(format!("{what}: zero rotation quaternion")));
    }
    Ok(canonical(Unit::new_normalize(raw)))
}

fn quat_array(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

fn axis(a: [f64; 3], what: &str) -> Result<Unit<Vec3>> {
    let v = Vec3::from(a);
    if !(v.norm() > 1e-9) {
        return Err(Error::Morphology(format!("{what}: zero joint axis")));
    }
    Ok(Unit::new_normalize(v))
}

fn limit_pairs(l: &[[f64; 2]]) -> Vec<(f64, f64)> {
    l.iter().map(|p| (p[0], p[1])).collect()
}

impl MorphologyFile {
    pub fn into_model(self) -> Result<HandModel> {
        if self.format != MORPHOLOGY_FORMAT {
            return Err(Error::Morphology(format!("unsupported format '{}', expected '{MORPHOLOGY_FORMAT}'", self.format)));
        }
        let arm = &self.arm;
        if !(arm.upper_arm > 0.0 && arm.forearm > 0.0 && arm.radius > 0.0) {
            return Err(Error::Morphology("arm segment lengths and radius must be positive".into()));
        }
        if arm.limits.len() != 7 || arm.rest.len() != 7 {
            return Err(Error::Morphology("arm needs 7 limit pairs and 7 rest angles".into()));
        }
        if !(self.palm.radius > 0.0) {
            return Err(Error::Morphology("palm radius must be positive".into()));
        }
        let (x, y, z) = (Vec3::x_axis(), Vec3::y_axis(), Vec3::z_axis());
        let shoulder_origin =
            RigidTransform::from_parts(Vec3::from(arm.shoulder_position).into(), quat(arm.shoulder_rotation, "shoulder")?);
        let l = limit_pairs(&arm.limits);
        let mut joints = vec![
            Joint {
                name: "shoulder".into(),
                parent: None,
                origin: shoulder_origin,
                axes: vec![z, y, x],
                limits: l[0..3].to_vec(),
                rest: arm.rest[0..3].to_vec(),
                offset: 0,
                link: Some(Link { end: Vec3::new(arm.upper_arm, 0.0, 0.0), radius: arm.radius }),
            },
            Joint {
                name: "elbow".into(),
                parent: Some(0),
                origin: RigidTransform::translation(arm.upper_arm, 0.0, 0.0),
                axes: vec![z],
                limits: l[3..4].to_vec(),
                rest: arm.rest[3..4].to_vec(),
                offset: 0,
                link: Some(Link { end: Vec3::new(arm.forearm, 0.0, 0.0), radius: arm.radius }),
            },
            Joint {
                name: "wrist".into(),
                parent: Some(1),
                origin: RigidTransform::translation(arm.forearm, 0.0, 0.0),
                axes: vec![x, y, z],
                limits: l[4..7].to_vec(),
                rest: arm.rest[4..7].to_vec(),
                offset: 0,
                link: Some(Link { end: Vec3::from(self.palm.end), radius: self.palm.radius }),
            },
        ];

        let mut index: HashMap<String, usize> = HashMap::new();
        index.insert("palm".into(), WRIST);
        let declared: HashMap<&str, usize> =
            self.joints.iter().enumerate().map(|(i, j)| (j.name.as_str(), i)).collect();
        for spec in &self.joints {
            if index.contains_key(&spec.name) {
                return Err(Error::Morphology(format!("duplicate joint name '{}'", spec.name)));
            }
            let parent = match index.get(&spec.parent) {
                Some(&p) => p,
                None if declared.contains_key(spec.parent.as_str()) => {
                    return Err(Error::Morphology(format!(
                        "joint '{}' listed before its parent '{}'",
                        spec.name, spec.parent
                    )))
                }
                None => {
                    return Err(Error::Morphology(format!("joint '{}' has unknown parent '{}'", spec.name, spec.parent)))
                }
            };
            let axes = spec.axes.iter().map(|a| axis(*a, &spec.name)).collect::<Result<Vec<_>>>()?;
            let rest = spec.rest.clone().unwrap_or_else(|| vec![0.0; axes.len()]);
            let rot = match spec.rotation {
                Some(r) => quat(r, &spec.name)?,
                None => Quat::identity(),
            };
            index.insert(spec.name.clone(), joints.len());
            joints.push(Joint {
                name: spec.name.clone(),
                parent: Some(parent),
                origin: RigidTransform::from_parts(Vec3::from(spec.origin).into(), rot),
                axes,
                limits: limit_pairs(&spec.limits),
                rest,
                offset: 0,
                link: None,
            });
        }
        for link in &self.links {
            let &j = index
                .get(&link.name)
                .filter(|&&j| j > WRIST)
                .ok_or_else(|| Error::Morphology(format!("link '{}' names no hand joint", link.name)))?;
            if !(link.radius > 0.0) {
                return Err(Error::Morphology(format!("link '{}' has nonpositive radius", link.name)));
            }
            joints[j].link = Some(Link { end: Vec3::from(link.end), radius: link.radius });
        }
        let fingers = self
            .fingers
            .iter()
            .map(|f| {
                index
                    .get(&f.tip)
                    .map(|&tip| Finger { name: f.name.clone(), tip })
                    .ok_or_else(|| Error::Morphology(format!("finger '{}' names unknown tip '{}'", f.name, f.tip)))
            })
            .collect::<Result<Vec<_>>>()?;
        let grip = GripFrame {
            chopsticks: RigidTransform::from_parts(
                Vec3::from(self.grip.chopstick_position).into(),
                quat(self.grip.chopstick_rotation, "grip")?,
            ),
            palm_center: Vec3::from(self.grip.palm_center),
        };
        HandModel::new(self.name, joints, fingers, grip)
    }

    pub fn from_model(model: &HandModel) -> Self {
        let j = &model.joints;
        let (upper_arm, forearm) = model.arm_lengths();
        let arm_joints = &j[..=WRIST];
        let limits: Vec<[f64; 2]> = arm_joints.iter().flat_map(|j| j.limits.iter().map(|&(a, b)| [a, b])).collect();
        let rest: Vec<f64> = arm_joints.iter().flat_map(|j| j.rest.iter().copied()).collect();
        let shoulder = j[0].origin;
        let palm = j[WRIST].link.as_ref().expect("palm link");
        let name_of = |i: usize| if i == WRIST { "palm".to_string() } else { j[i].name.clone() };
        let v3 = |v: &Vec3| [v.x, v.y, v.z];
        Self {
            format: MORPHOLOGY_FORMAT.into(),
            name: model.name.clone(),
            arm: ArmSpec {
                shoulder_position: v3(&shoulder.translation.vector),
                shoulder_rotation: quat_array(&shoulder.rotation),
                upper_arm,
                forearm,
                radius: j[0].link.as_ref().map_or(0.04, |l| l.radius),
                limits,
                rest,
            },
            palm: PalmSpec { end: v3(&palm.end), radius: palm.radius },
            grip: GripSpec {
                chopstick_position: v3(&model.grip.chopsticks.translation.vector),
                chopstick_rotation: quat_array(&model.grip.chopsticks.rotation),
                palm_center: v3(&model.grip.palm_center),
            },
            fingers: model
                .fingers
                .iter()
                .map(|f| FingerSpec { name: f.name.clone(), tip: j[f.tip].name.clone() })
                .collect(),
            joints: j[WRIST + 1..]
                .iter()
                .map(|jt| JointSpec {
                    name: jt.name.clone(),
                    parent: name_of(jt.parent.expect("hand joints have parents")),
                    origin: v3(&jt.origin.translation.vector),
                    rotation: if jt.origin.rotation == Quat::identity() {
                        None
                    } else {
                        Some(quat_array(&jt.origin.rotation))
                    },
                    axes: jt.axes.iter().map(|a| v3(a)).collect(),
                    limits: jt.limits.iter().map(|&(a, b)| [a, b]).collect(),
                    rest: Some(jt.rest.clone()),
                })
                .collect(),
            links: j[WRIST + 1..]
                .iter()
                .filter_map(|jt| {
                    jt.link.as_ref().map(|l| LinkSpec { name: jt.name.clone(), end: v3(&l.end), radius: l.radius })
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("morphology serializes")
    }
}

/// Parses morphology text.
/// FNV-1a hash of the canonical morphology text; identifies the hand a file
/// was planned for.
pub fn morphology_hash(model: &HandModel) -> u64 {
    MorphologyFile::from_model(model).to_toml().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn parse_morphology(text: &str) -> Result<HandModel> {
    let file: MorphologyFile = toml::from_str(text).map_err(|e| crate::config::toml_error(text, &e))?;
    file.into_model()
}

/// Loads a morphology file from disk.
pub fn load_morphology(path: impl AsRef<Path>) -> Result<HandModel> {
    let text = std::fs::read_to_string(path)?;
    parse_morphology(&text)
}
