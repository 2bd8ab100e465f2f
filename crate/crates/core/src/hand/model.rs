use nalgebra::Unit;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Capsule, Quat, RigidTransform, Vec3};

/// Shoulder (3) + elbow (1) + wrist (3). Arm DoFs lead every joint vector.
pub const ARM_DOFS: usize = 7;

pub(crate) const SHOULDER: usize = 0;
pub(crate) const ELBOW: usize = 1;
pub(crate) const WRIST: usize = 2;

/// Capsule geometry of a link, running from the link frame origin to `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub end: Vec3,
    pub radius: f64,
}

impl Link {
    pub fn length(&self) -> f64 {
        self.end.norm()
    }

    pub fn capsule(&self, frame: &RigidTransform) -> Capsule {
        let a = frame.translation.vector;
        let b = frame.transform_point(&self.end.into()).coords;
        Capsule::from_segment(a, b, self.radius)
    }
}

/// One joint of the tree. Each axis is a single revolute DoF; the rotations
/// are applied intrinsically in the listed order.
#[derive(Debug, Clone)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub origin: RigidTransform,
    pub axes: Vec<Unit<Vec3>>,
    pub limits: Vec<(f64, f64)>,
    pub rest: Vec<f64>,
    /// Index of this joint's first DoF in the joint vector.
    pub offset: usize,
    pub link: Option<Link>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finger {
    pub name: String,
    /// Joint whose link is the distal phalanx.
    pub tip: usize,
}

/// Where the lower chopstick sits in the palm frame when held.
#[derive(Debug, Clone, PartialEq)]
pub struct GripFrame {
    /// Lower-stick tip frame (local z towards the rear end) in palm coordinates.
    pub chopsticks: RigidTransform,
    /// Contacts are offset from the stick axis towards this point.
    pub palm_center: Vec3,
}

#[derive(Debug, Clone)]
pub struct HandModel {
    pub name: String,
    pub joints: Vec<Joint>,
    pub fingers: Vec<Finger>,
    pub grip: GripFrame,
    dofs: usize,
    /// For each joint, the DoFs on its path to the root (including its own).
    chain_dofs: Vec<Vec<usize>>,
}

/// Link frames plus the world axis and pivot of every DoF.
#[derive(Debug, Clone)]
pub struct FkResult {
    pub frames: Vec<RigidTransform>,
    pub axes: Vec<Vec3>,
    pub pivots: Vec<Vec3>,
}

impl FkResult {
    /// Velocity of a point rigidly attached to `joint` per unit rate of `dof`.
    pub fn point_derivative(&self, dof: usize, point: &Vec3) -> Vec3 {
        self.axes[dof].cross(&(point - self.pivots[dof]))
    }
}

impl HandModel {
    /// Assembles a model and validates the tree. Joints must be listed
    /// parents-first; the first three are shoulder, elbow and wrist.
    pub fn new(name: String, joints: Vec<Joint>, fingers: Vec<Finger>, grip: GripFrame) -> Result<Self> {
        if joints.len() < 3 {
            return Err(Error::Morphology("model needs shoulder, elbow and wrist".into()));
        }
        let arm_dofs: usize = joints[..3].iter().map(|j| j.axes.len()).sum();
        if arm_dofs != ARM_DOFS || joints[SHOULDER].parent.is_some() {
            return Err(Error::Morphology("arm must be a 3+1+3 DoF chain rooted at the shoulder".into()));
        }
        let mut offset = 0;
        let mut joints = joints;
        let mut chain_dofs: Vec<Vec<usize>> = Vec::with_capacity(joints.len());
        for (i, j) in joints.iter_mut().enumerate() {
            if j.axes.len() != j.limits.len() || j.axes.len() != j.rest.len() {
                return Err(Error::Morphology(format!("joint '{}': axes, limits and rest differ in length", j.name)));
            }
            for &(lo, hi) in &j.limits {
                if !(lo <= hi) {
                    return Err(Error::Morphology(format!("joint '{}': empty limit range", j.name)));
                }
            }
            if let Some(link) = &j.link {
                if !(link.radius > 0.0) || !link.end.iter().all(|v| v.is_finite()) {
                    return Err(Error::Morphology(format!("link '{}': nonpositive radius", j.name)));
                }
            }
            let mut chain = match j.parent {
                Some(p) if p >= i => {
                    return Err(Error::Morphology(format!("joint '{}' listed before its parent", j.name)))
                }
                Some(p) => chain_dofs[p].clone(),
                None if i == SHOULDER => Vec::new(),
                None => return Err(Error::Morphology(format!("joint '{}' has no parent", j.name))),
            };
            j.offset = offset;
            chain.extend(offset..offset + j.axes.len());
            offset += j.axes.len();
            chain_dofs.push(chain);
        }
        for f in &fingers {
            let tip = joints
                .get(f.tip)
                .ok_or_else(|| Error::Morphology(format!("finger '{}' has no tip joint", f.name)))?;
            if tip.link.is_none() || f.tip <= WRIST {
                return Err(Error::Morphology(format!("finger '{}' tip has no link geometry", f.name)));
            }
        }
        if fingers.len() < 2 {
            return Err(Error::Morphology("at least two fingers are required".into()));
        }
        Ok(Self { name, joints, fingers, grip, dofs: offset, chain_dofs })
    }

    pub fn dof_count(&self) -> usize {
        self.dofs
    }

    pub fn hand_dof_count(&self) -> usize {
        self.dofs - ARM_DOFS
    }

    pub fn finger_count(&self) -> usize {
        self.fingers.len()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    /// Fixed shoulder frame in world coordinates.
    pub fn shoulder(&self) -> RigidTransform {
        self.joints[SHOULDER].origin
    }

    /// Upper-arm and forearm lengths.
    pub fn arm_lengths(&self) -> (f64, f64) {
        (self.joints[ELBOW].origin.translation.vector.norm(), self.joints[WRIST].origin.translation.vector.norm())
    }

    pub fn limits(&self) -> Vec<(f64, f64)> {
        self.joints.iter().flat_map(|j| j.limits.iter().copied()).collect()
    }

    /// Default T-pose used to seed grip IK.
    pub fn rest_pose(&self) -> Vec<f64> {
        self.joints.iter().flat_map(|j| j.rest.iter().copied()).collect()
    }

    pub fn clamp(&self, q: &mut [f64]) {
        for (v, (lo, hi)) in q.iter_mut().zip(self.limits()) {
            *v = v.clamp(lo, hi);
        }
    }

    /// DoFs that move the frame of `joint`.
    pub fn chain_dofs(&self, joint: usize) -> &[usize] {
        &self.chain_dofs[joint]
    }

    fn check_len(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dofs {
            return Err(Error::Dimension { expected: self.dofs, got: q.len() });
        }
        Ok(())
    }

    /// World transforms of every link frame.
    pub fn forward_kinematics(&self, q: &[f64]) -> Result<FkResult> {
        self.check_len(q)?;
        Ok(self.fk_impl(q, None))
    }

    /// Forward kinematics of the hand joints with the palm placed at `palm`;
    /// arm DoFs in `q` are ignored.
    pub fn forward_kinematics_from_palm(&self, q: &[f64], palm: &RigidTransform) -> Result<FkResult> {
        self.check_len(q)?;
        Ok(self.fk_impl(q, Some(palm)))
    }

    fn fk_impl(&self, q: &[f64], palm: Option<&RigidTransform>) -> FkResult {
        let n = self.joints.len();
        let mut frames = Vec::with_capacity(n);
        let mut axes = vec![Vec3::zeros(); self.dofs];
        let mut pivots = vec![Vec3::zeros(); self.dofs];
        for (i, j) in self.joints.iter().enumerate() {
            if let (Some(p), true) = (palm, i <= WRIST) {
                frames.push(if i == WRIST { *p } else { RigidTransform::identity() });
                continue;
            }
            let mut frame = match j.parent {
                Some(p) => frames[p] * j.origin,
                None => j.origin,
            };
            for (k, axis) in j.axes.iter().enumerate() {
                let d = j.offset + k;
                pivots[d] = frame.translation.vector;
                axes[d] = frame.rotation * axis.into_inner();
                frame *= RigidTransform::from_parts(Default::default(), Quat::from_axis_angle(axis, q[d]));
            }
            frames.push(frame);
        }
        FkResult { frames, axes, pivots }
    }

    /// Capsule of the distal phalanx of `finger`.
    pub fn fingertip_capsule(&self, fk: &FkResult, finger: usize) -> Capsule {
        let tip = self.fingers[finger].tip;
        self.joints[tip].link.as_ref().expect("validated").capsule(&fk.frames[tip])
    }

    /// Point on the fingertip surface closest to `target` and its distance.
    pub fn fingertip_closest_point(&self, q: &[f64], finger: usize, target: &Vec3) -> Result<(Vec3, f64)> {
        if finger >= self.fingers.len() {
            return Err(Error::Invalid(format!("finger index {finger} out of range")));
        }
        let fk = self.forward_kinematics(q)?;
        Ok(closest_on_capsule(&self.fingertip_capsule(&fk, finger), target))
    }
}

/// Closest surface point of a capsule to `target` and the distance to it.
pub(crate) fn closest_on_capsule(c: &Capsule, target: &Vec3) -> (Vec3, f64) {
    let (a, b) = c.segment();
    let (d, _, axis_pt) = point_segment_distance(target, &a, &b);
    let dir = if d > 1e-12 {
        (target - axis_pt) / d
    } else if (b - a).norm() > 1e-12 {
        crate::geometry::any_orthogonal(&(b - a))
    } else {
        Vec3::x()
    };
    (axis_pt + dir * c.radius, (d - c.radius).abs())
}
