use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};
use crate::grip::{GripPose, GripProblem, IkOptions};
use crate::hand::HandModel;
use crate::tracking::{reward, SimFrame};
use nalgebra::{Translation3, UnitQuaternion};

/// Scores a gripping pose; higher is better.
pub trait PoseEvaluator {
    fn evaluate(&self, model: &HandModel, pose: &GripPose) -> Result<f64>;
}

/// One open-close motion with the sticks pointing along `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maneuver {
    pub direction: Vec3,
    pub duration: f64,
}

/// Open-close maneuvers used to score a pose. The opening profile is added
/// on top of the pose's own grip angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverSpec {
    pub segments: Vec<Maneuver>,
    pub phi_max: f64,
    pub dt: f64,
    /// Where the lower-stick tip is held in the world.
    pub anchor: Vec3,
}

impl Default for ManeuverSpec {
    fn default() -> Self {
        let (s, c) = 30f64.to_radians().sin_cos();
        let seg = |d: Vec3| Maneuver { direction: d, duration: 1.0 };
        Self {
            segments: vec![seg(Vec3::x()), seg(Vec3::new(c, s, 0.0)), seg(Vec3::new(c, 0.0, -s))],
            phi_max: 0.15,
            dt: 0.01,
            anchor: Vec3::new(0.3, 0.0, 0.2),
        }
    }
}

impl ManeuverSpec {
    /// Opening angle `t` seconds into a segment of length `duration`.
    pub fn phi(&self, t: f64, duration: f64) -> f64 {
        self.phi_max * (1.0 - (std::f64::consts::TAU * t / duration).cos()) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() || !(self.dt > 0.0) || !(self.phi_max >= 0.0) {
            return Err(Error::Invalid("maneuvers need segments, dt > 0 and phi_max >= 0".into()));
        }
        for s in &self.segments {
            if !(s.duration > 0.0) || s.direction.norm() < 1e-12 {
                return Err(Error::Invalid(format!("bad maneuver segment {s:?}")));
            }
        }
        Ok(())
    }

    /// World lower-stick frame for a segment: tip at the anchor, tip
    /// direction (local -z) along the segment direction.
    pub fn lower_frame(&self, segment: &Maneuver) -> RigidTransform {
        let rot = UnitQuaternion::rotation_between(&-Vec3::z(), &segment.direction.normalize())
            .unwrap_or_else(|| UnitQuaternion::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI));
        RigidTransform::from_parts(Translation3::from(self.anchor), rot)
    }
}

/// Kinematic tracking of the open-close maneuvers.
#[derive(Debug, Clone)]
pub struct KinematicEvaluator {
    pub maneuvers: ManeuverSpec,
    pub ik: IkOptions,
    /// A contact residual above this (m) ends the run; later steps score 0.
    pub divergence: f64,
    /// Weight of the pull towards the pose being evaluated.
    pub prior_weight: f64,
}

impl Default for KinematicEvaluator {
    fn default() -> Self {
        Self { maneuvers: ManeuverSpec::default(), ik: IkOptions { max_iters: 100, ..IkOptions::default() }, divergence: 0.01, prior_weight: 1e-4 }
    }
}

impl PoseEvaluator for KinematicEvaluator {
    fn evaluate(&self, model: &HandModel, pose: &GripPose) -> Result<f64> {
        evaluate_grip_kinematic(model, pose, &self.maneuvers, &self.ik, self.divergence, self.prior_weight)
    }
}

/// Mean per-step reward while the hand follows the maneuvers, re-solving
/// contact IK each step from the previous solution.
pub fn evaluate_grip_kinematic(
    model: &HandModel,
    pose: &GripPose,
    maneuvers: &ManeuverSpec,
    ik: &IkOptions,
    divergence: f64,
    prior_weight: f64,
) -> Result<f64> {
    pose.check_model(model)?;
    maneuvers.validate()?;
    let spec = ChopstickSpec::default();
    let mut problem = GripProblem::new(model, &pose.style, &pose.x, spec, &IkOptions { grip_phi: pose.grip_phi, ..*ik })?;
    problem.prior = Some((pose.q.clone(), prior_weight));
    let in_palm = pose.sticks_in_palm(model);
    let fingers = model.finger_count();
    let mut q = pose.q.clone();
    let mut total = 0.0;
    let mut steps = 0usize;
    let mut diverged = false;
    for seg in &maneuvers.segments {
        let lower = maneuvers.lower_frame(seg);
        let palm = pose.hand_root(model, &lower);
        let n = (seg.duration / maneuvers.dt).round().max(1.0) as usize;
        for k in 1..=n {
            steps += 1;
            if diverged {
                continue;
            }
            let phi = pose.grip_phi + maneuvers.phi(k as f64 * maneuvers.dt, seg.duration);
            problem.place_sticks(&in_palm, phi);
            let (qn, residuals, _, _) = problem.minimize_from(&q, ik)?;
            if residuals.iter().any(|r| *r > divergence) {
                diverged = true;
                continue;
            }
            q = qn;
            let chop = ChopstickConfig::from_frame(&lower, phi);
            let mut gaps = vec![0.0; fingers];
            for (&f, r) in problem.fingers.iter().zip(&residuals) {
                gaps[f] = *r;
            }
            let sim = SimFrame::at_rest(&spec, q.clone(), palm, chop, None, gaps);
            let reference = SimFrame::at_rest(&spec, pose.q.clone(), palm, chop, None, vec![0.0; fingers]);
            total += reward(&sim, &reference, &pose.style).r;
        }
    }
    Ok(total / steps as f64)
}

/// A pose that keeps the hand in its rest pose, with contacts assigned but
/// not reached.
pub fn t_pose(model: &HandModel, style: &crate::styles::GrippingStyle, x: &[f64]) -> Result<GripPose> {
    let opts = IkOptions::default();
    let p = GripProblem::new(model, style, x, ChopstickSpec::default(), &opts)?;
    let q = model.rest_pose();
    let (residuals, penetration) = p.report(&q)?;
    let to_stick = model.grip.chopsticks.inverse();
    Ok(GripPose {
        hand: model.name.clone(),
        q,
        style: style.clone(),
        x: x.to_vec(),
        anchors: p.targets.iter().map(|t| to_stick.transform_point(&(*t).into()).coords).collect(),
        holding_offset: 0.0,
        grip_phi: opts.grip_phi,
        residuals,
        penetration,
    })
}
