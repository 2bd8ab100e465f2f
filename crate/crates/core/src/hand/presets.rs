use nalgebra::{Matrix3, Rotation3, UnitQuaternion};

use super::model::HandModel;
use super::morphology::{
    ArmSpec, FingerSpec, GripSpec, JointSpec, LinkSpec, MorphologyFile, PalmSpec, MORPHOLOGY_FORMAT,
};
use crate::chopsticks::ChopstickSpec;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const PRESET_NAMES: [&str; 4] = ["standard", "long-finger", "large", "tri-finger"];

/// Built-in morphologies.
pub fn preset(name: &str) -> Result<HandModel> {
    preset_file(name)?.into_model()
}

pub(crate) fn preset_file(name: &str) -> Result<MorphologyFile> {
    let mut f = standard();
    match name {
        "standard" => {}
        "long-finger" => {
            f.name = name.into();
            scale_phalanges(&mut f, 2.0);
            f.grip = grip_spec(Vec3::new(0.16, -0.005, -0.075), Vec3::new(-0.8, 0.3, 0.5), Vec3::new(0.05, 0.0, -0.02));
        }
        "large" => {
            f.name = name.into();
            scale_hand(&mut f, 2.0);
            f.grip = grip_spec(Vec3::new(0.20, 0.01, -0.11), Vec3::new(-0.8, 0.45, 0.4), Vec3::new(0.10, 0.0, -0.04));
        }
        "tri-finger" => {
            f.name = name.into();
            let keep = |n: &str| !(n.starts_with("ring") || n.starts_with("pinky"));
            f.joints.retain(|j| keep(&j.name));
            f.links.retain(|l| keep(&l.name));
            f.fingers.retain(|fg| keep(&fg.name));
        }
        other => return Err(Error::Invalid(format!("unknown hand preset '{other}'"))),
    }
    Ok(f)
}

fn q_array(q: &UnitQuaternion<f64>) -> [f64; 4] {
    let q = crate::geometry::canonical(*q);
    [q.w, q.i, q.j, q.k]
}

/// Rotation whose local x is `forward` and whose local -z leans towards `curl`.
fn frame_from(forward: Vec3, curl: Vec3) -> UnitQuaternion<f64> {
    let x = forward.normalize();
    let c = (curl - x * curl.dot(&x)).normalize();
    let z = -c;
    let y = z.cross(&x);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z])))
}

/// Places the lower stick so its midpoint sits at `mid` with the rear end
/// pointing along `rear` (towards the thumb valley); the opening direction
/// leans towards the back of the hand.
fn grip_spec(mid: Vec3, rear: Vec3, palm_center: Vec3) -> GripSpec {
    let rear = rear.normalize();
    let up = Vec3::z();
    let open = (up - rear * up.dot(&rear)).normalize();
    let side = open.cross(&rear);
    let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[
        side, open, rear,
    ])));
    let tip = mid - rear * (0.5 * ChopstickSpec::default().length);
    GripSpec {
        chopstick_position: [tip.x, tip.y, tip.z],
        chopstick_rotation: q_array(&rot),
        palm_center: [palm_center.x, palm_center.y, palm_center.z],
    }
}

struct DigitDims {
    name: &'static str,
    base_y: f64,
    knuckle: [f64; 3],
    phalanges: [f64; 3],
    radius: f64,
    tip_radius: f64,
}

const FINGERS: [DigitDims; 4] = [
    DigitDims { name: "index", base_y: 0.010, knuckle: [0.090, 0.015, 0.0], phalanges: [0.045, 0.026, 0.022], radius: 0.0095, tip_radius: 0.0085 },
    DigitDims { name: "middle", base_y: 0.0, knuckle: [0.092, 0.005, 0.0], phalanges: [0.050, 0.030, 0.024], radius: 0.0095, tip_radius: 0.0085 },
    DigitDims { name: "ring", base_y: -0.010, knuckle: [0.086, -0.005, 0.0], phalanges: [0.046, 0.028, 0.023], radius: 0.009, tip_radius: 0.008 },
    DigitDims { name: "pinky", base_y: -0.018, knuckle: [0.076, -0.014, 0.0], phalanges: [0.036, 0.021, 0.020], radius: 0.008, tip_radius: 0.0075 },
];

/// Human-scale right hand: palm faces -z, fingers point +x, thumb on +y.
fn standard() -> MorphologyFile {
    use std::f64::consts::PI;
    let mut joints = Vec::new();
    let mut links = Vec::new();

    // thumb: 3 + 2 + 1 DoF
    let thumb_rot = frame_from(Vec3::new(0.55, 0.55, -0.45), Vec3::new(0.1, -1.0, -0.3));
    joints.push(JointSpec {
        name: "thumb_metacarpal".into(),
        parent: "palm".into(),
        origin: [0.012, 0.022, -0.012],
        rotation: Some(q_array(&thumb_rot)),
        axes: vec![[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
        limits: vec![[-0.7, 0.7], [-0.5, 1.0], [-0.7, 0.7]],
        rest: Some(vec![0.0, 0.2, 0.0]),
    });
    links.push(LinkSpec { name: "thumb_metacarpal".into(), end: [0.045, 0.0, 0.0], radius: 0.011 });
    joints.push(JointSpec {
        name: "thumb_proximal".into(),
        parent: "thumb_metacarpal".into(),
        origin: [0.045, 0.0, 0.0],
        rotation: None,
        axes: vec![[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
        limits: vec![[-0.4, 0.4], [-0.3, 1.3]],
        rest: Some(vec![0.0, 0.2]),
    });
    links.push(LinkSpec { name: "thumb_proximal".into(), end: [0.032, 0.0, 0.0], radius: 0.0095 });
    joints.push(JointSpec {
        name: "thumb_distal".into(),
        parent: "thumb_proximal".into(),
        origin: [0.032, 0.0, 0.0],
        rotation: None,
        axes: vec![[0.0, 1.0, 0.0]],
        limits: vec![[-0.3, 1.4]],
        rest: Some(vec![0.2]),
    });
    links.push(LinkSpec { name: "thumb_distal".into(), end: [0.028, 0.0, 0.0], radius: 0.009 });

    for d in &FINGERS {
        let mc = format!("{}_mc", d.name);
        let prox = format!("{}_proximal", d.name);
        let mid = format!("{}_middle", d.name);
        let dist = format!("{}_distal", d.name);
        // palm bone: 2 DoF deformation
        joints.push(JointSpec {
            name: mc.clone(),
            parent: "palm".into(),
            origin: [0.0, d.base_y, 0.0],
            rotation: None,
            axes: vec![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            limits: vec![[-0.15, 0.15], [-0.15, 0.15]],
            rest: Some(vec![0.0, 0.0]),
        });
        links.push(LinkSpec { name: mc.clone(), end: d.knuckle, radius: 0.01 });
        joints.push(JointSpec {
            name: prox.clone(),
            parent: mc,
            origin: d.knuckle,
            rotation: None,
            axes: vec![[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
            limits: vec![[-0.6, 0.6], [-0.3, 1.7]],
            rest: Some(vec![0.0, 0.1]),
        });
        links.push(LinkSpec { name: prox.clone(), end: [d.phalanges[0], 0.0, 0.0], radius: d.radius });
        joints.push(JointSpec {
            name: mid.clone(),
            parent: prox,
            origin: [d.phalanges[0], 0.0, 0.0],
            rotation: None,
            axes: vec![[0.0, 1.0, 0.0]],
            limits: vec![[0.0, 1.9]],
            rest: Some(vec![0.1]),
        });
        links.push(LinkSpec { name: mid.clone(), end: [d.phalanges[1], 0.0, 0.0], radius: d.radius });
        joints.push(JointSpec {
            name: dist.clone(),
            parent: mid,
            origin: [d.phalanges[1], 0.0, 0.0],
            rotation: None,
            axes: vec![[0.0, 1.0, 0.0]],
            limits: vec![[0.0, 1.5]],
            rest: Some(vec![0.05]),
        });
        links.push(LinkSpec { name: dist, end: [d.phalanges[2], 0.0, 0.0], radius: d.tip_radius });
    }

    // union valley between thumb and index, fixed to the palm
    joints.push(JointSpec {
        name: "valley".into(),
        parent: "palm".into(),
        origin: [0.015, 0.028, -0.008],
        rotation: None,
        axes: vec![],
        limits: vec![],
        rest: None,
    });
    links.push(LinkSpec { name: "valley".into(), end: [0.045, -0.004, 0.0], radius: 0.011 });

    let fingers = ["thumb", "index", "middle", "ring", "pinky"]
        .iter()
        .map(|n| FingerSpec { name: (*n).into(), tip: format!("{n}_distal") })
        .collect();

    MorphologyFile {
        format: MORPHOLOGY_FORMAT.into(),
        name: "standard".into(),
        arm: ArmSpec {
            shoulder_position: [-0.30, 0.0, 0.40],
            shoulder_rotation: [1.0, 0.0, 0.0, 0.0],
            upper_arm: 0.30,
            forearm: 0.28,
            radius: 0.04,
            limits: vec![
                [-PI, PI],
                [-1.55, 1.55],
                [-PI, PI],
                [0.0, 2.7],
                [-2.6, 2.6],
                [-1.5, 1.5],
                [-2.6, 2.6],
            ],
            rest: vec![0.0, 0.6, 0.0, 1.2, 0.0, 0.3, 0.0],
        },
        palm: PalmSpec { end: [0.08, 0.0, 0.0], radius: 0.02 },
        grip: grip_spec(Vec3::new(0.10, -0.01, -0.045), Vec3::new(-0.8, 0.6, 0.3), Vec3::new(0.05, 0.0, -0.02)),
        fingers,
        joints,
        links,
    }
}

fn scale3(v: &mut [f64; 3], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

fn is_phalanx(name: &str) -> bool {
    name.ends_with("_proximal") || name.ends_with("_middle") || name.ends_with("_distal")
}

/// Multiplies every finger and thumb phalanx length by `s`.
fn scale_phalanges(f: &mut MorphologyFile, s: f64) {
    for l in f.links.iter_mut().filter(|l| is_phalanx(&l.name)) {
        scale3(&mut l.end, s);
    }
    // a phalanx joint sits at the end of its parent phalanx
    let parents: Vec<String> = f.joints.iter().map(|j| j.parent.clone()).collect();
    for (j, parent) in f.joints.iter_mut().zip(parents) {
        if is_phalanx(&parent) {
            scale3(&mut j.origin, s);
        }
    }
}

/// Scales all hand dimensions (not the arm) by `s`.
fn scale_hand(f: &mut MorphologyFile, s: f64) {
    scale3(&mut f.palm.end, s);
    f.palm.radius *= s;
    for j in &mut f.joints {
        scale3(&mut j.origin, s);
    }
    for l in &mut f.links {
        scale3(&mut l.end, s);
        l.radius *= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::{parse_morphology, MorphologyFile, ARM_DOFS};

    #[test]
    fn standard_has_thirty_hand_dofs() {
        let m = preset("standard").unwrap();
        assert_eq!(m.hand_dof_count(), 30);
        assert_eq!(m.dof_count(), 30 + ARM_DOFS);
        assert_eq!(m.finger_count(), 5);
        let thumb: usize = ["thumb_metacarpal", "thumb_proximal", "thumb_distal"]
            .iter()
            .map(|n| m.joints[m.joint_index(n).unwrap()].axes.len())
            .sum();
        assert_eq!(thumb, 6);
    }

    #[test]
    fn tri_finger_has_three_fingers() {
        let m = preset("tri-finger").unwrap();
        assert_eq!(m.finger_count(), 3);
        assert_eq!(m.hand_dof_count(), 6 + 2 * 6);
    }

    #[test]
    fn variants_scale_geometry() {
        let std = preset("standard").unwrap();
        let long = preset("long-finger").unwrap();
        let large = preset("large").unwrap();
        let len = |m: &HandModel, n: &str| m.joints[m.joint_index(n).unwrap()].link.as_ref().unwrap().length();
        assert!((len(&long, "index_distal") - 2.0 * len(&std, "index_distal")).abs() < 1e-12);
        assert!((len(&long, "index_mc") - len(&std, "index_mc")).abs() < 1e-12);
        assert!((len(&large, "index_mc") - 2.0 * len(&std, "index_mc")).abs() < 1e-12);
        assert_eq!(large.arm_lengths(), std.arm_lengths());
    }

    #[test]
    fn presets_roundtrip_through_text() {
        for name in PRESET_NAMES {
            let m = preset(name).unwrap();
            let text = MorphologyFile::from_model(&m).to_toml();
            let back = parse_morphology(&text).unwrap();
            assert_eq!(back.dof_count(), m.dof_count());
            assert_eq!(MorphologyFile::from_model(&back), MorphologyFile::from_model(&m), "{name}");
        }
    }

    #[test]
    fn unknown_preset_is_error() {
        assert!(preset("octopus").is_err());
    }
}
