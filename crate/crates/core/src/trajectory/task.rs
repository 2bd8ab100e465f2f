use rand::Rng;

use super::arm_ik::arm_track;
use super::phase::{optimize_phase, Environment, Phase, PhaseOptions, PhasePlan, PhiProfile};
use super::throw::{plan_throw, release_point, ThrowOptions, ThrowPlan};
use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::error::{Error, Result};
use crate::geometry::{canonical_transform, RigidTransform, Vec3};
use crate::grip::GripPose;
use crate::hand::{morphology_hash, HandModel, ARM_DOFS};
use crate::object::RigidObject;
use crate::styles::GrippingStyle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Goal {
    /// Final object pose.
    Move(RigidTransform),
    /// Landing point of the object's centre.
    Throw { target: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskOptions {
    pub phase: PhaseOptions,
    /// Closing time at the end of the approach (s).
    pub close_ramp: f64,
    /// Opening time at the start of the release (s).
    pub release_ramp: f64,
    /// Extra opening beyond the grasp angle while approaching and releasing.
    pub open_margin: f64,
    /// Lift of the open sticks during the release (m), so the next approach
    /// starts clear of the object just placed.
    pub retreat: f64,
    pub throw: ThrowOptions,
}

impl Default for TaskOptions {
    fn default() -> Self {
        Self { phase: PhaseOptions::default(), close_ramp: 0.2, release_ramp: 0.3, open_margin: 0.1, retreat: 0.05, throw: ThrowOptions::default() }
    }
}

/// Previous arm state, used to keep the swivel and joint branch continuous.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmHint {
    pub swivel: f64,
    pub q: Option<[f64; ARM_DOFS]>,
}

pub struct TaskRequest<'a> {
    pub model: &'a HandModel,
    pub grip: &'a GripPose,
    pub object: &'a RigidObject,
    pub start: ChopstickConfig,
    pub grasp: ChopstickConfig,
    pub goal: Goal,
    /// Obstacles other than the manipulated object.
    pub environment: &'a Environment,
    pub table_height: f64,
    /// Horizontal extent of the reach cuboid, used to place throw releases.
    pub workspace: (Vec3, Vec3),
    pub arm_hint: ArmHint,
    /// Overrides for the three phase durations (s).
    pub durations: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajFrame {
    pub time: f64,
    pub phase: Phase,
    pub chop: ChopstickConfig,
    pub hand_root: RigidTransform,
    pub arm_q: [f64; ARM_DOFS],
    pub swivel: f64,
    pub object: RigidTransform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSummary {
    pub phase: Phase,
    pub duration: f64,
    pub arc_length: f64,
    pub frames: usize,
}

/// Time-sampled plan for one object.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTrajectory {
    pub dt: f64,
    pub hand: String,
    pub morphology_hash: u64,
    pub style: GrippingStyle,
    /// Joint vector of the gripping pose; the hand entries are used for every
    /// frame.
    pub grip_q: Vec<f64>,
    pub holding_offset: f64,
    pub object_id: String,
    pub phases: Vec<PhaseSummary>,
    pub frames: Vec<TrajFrame>,
}

impl TaskTrajectory {
    pub fn final_config(&self) -> Option<ChopstickConfig> {
        self.frames.last().map(|f| f.chop)
    }

    pub fn final_arm(&self) -> ArmHint {
        self.frames.last().map_or(ArmHint::default(), |f| ArmHint { swivel: f.swivel, q: Some(f.arm_q) })
    }

    /// Full joint vector (arm then hand) of frame `i`.
    pub fn joint_vector(&self, i: usize) -> Vec<f64> {
        let mut q = self.grip_q.clone();
        q[..ARM_DOFS].copy_from_slice(&self.frames[i].arm_q);
        q
    }
}

fn tagged<T>(phase: Phase, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_phase(phase.name()))
}

/// Plans approach, relocate and release for one object and samples hand,
/// arm and object along them.
pub fn assemble_task<R: Rng>(req: &TaskRequest, opts: &TaskOptions, rng: &mut R) -> Result<TaskTrajectory> {
    let spec = ChopstickSpec::default();
    let po = &opts.phase;
    let phi_grasp = req.grasp.phi;
    let phi_open = (phi_grasp + opts.open_margin).min(spec.phi_max);
    let set = |plan: &mut PhasePlan, i: usize| {
        if let Some(d) = req.durations {
            plan.set_duration(d[i], po.dt);
        }
    };

    // approach: open while travelling, close over the final ramp
    let mut approach = PhasePlan::new(Phase::Approach, req.start, req.grasp, PhiProfile::constant(phi_grasp), opts.close_ramp, po);
    set(&mut approach, 0);
    let d = approach.duration;
    approach.phi = PhiProfile { keys: vec![(0.0, req.start.phi), ((d - opts.close_ramp).max(0.0), phi_open), (d, phi_grasp)] };
    let approach = tagged(Phase::Approach, optimize_phase(&approach, req.environment, &spec, po, rng))?;

    let (end, throw) = match req.goal {
        Goal::Move(goal) => {
            let lower = goal * req.object.pose.inverse() * req.grasp.lower_frame();
            (ChopstickConfig::from_frame(&lower, phi_grasp), None)
        }
        Goal::Throw { target } => {
            let (lo, hi) = req.workspace;
            let release = release_point(&lo, &hi, req.table_height, &target, &opts.throw);
            let plan = tagged(Phase::Relocate, plan_throw(release, &target, &opts.throw))?;
            let shift = release - req.object.center();
            (ChopstickConfig::new(req.grasp.position + shift, req.grasp.orientation, phi_grasp), Some(plan))
        }
    };
    let mut relocate = PhasePlan::new(Phase::Relocate, req.grasp, end, PhiProfile::constant(phi_grasp), 0.0, po);
    set(&mut relocate, 1);
    if let Some(t) = &throw {
        if relocate.duration <= 0.0 {
            return Err(Error::Invalid("throw release coincides with the grasp".into()).in_phase("relocate"));
        }
        relocate.q2 = end.position - t.velocity * (relocate.duration / 3.0);
        relocate.fixed_q2 = true;
    }
    let relocate = tagged(Phase::Relocate, optimize_phase(&relocate, req.environment, &spec, po, rng))?;

    let hold = throw.map_or(opts.release_ramp, |t| opts.release_ramp.max(t.flight_time));
    let mut release = PhasePlan::new(
        Phase::Release,
        end,
        ChopstickConfig { position: end.position + Vec3::z() * opts.retreat, phi: phi_open, ..end },
        PhiProfile { keys: vec![(0.0, phi_grasp), (opts.release_ramp, phi_open)] },
        hold,
        po,
    );
    set(&mut release, 2);
    let release = tagged(Phase::Release, optimize_phase(&release, req.environment, &spec, po, rng))?;

    let grasp_tip = req.grasp.tip_frame(&spec);
    let attached = grasp_tip.inverse() * req.object.pose;
    let mut frames = Vec::new();
    let mut phases = Vec::new();
    let mut object_at_release = req.object.pose;
    let mut samples = Vec::new();
    for (i, plan) in [&approach, &relocate, &release].into_iter().enumerate() {
        let skip = usize::from(i > 0);
        let before = samples.len();
        for (k, chop) in plan.sample(po.dt).into_iter().enumerate().skip(skip) {
            let local_t = k as f64 * po.dt;
            let object = match plan.phase {
                Phase::Approach => req.object.pose,
                Phase::Relocate => {
                    object_at_release = chop.tip_frame(&spec) * attached;
                    object_at_release
                }
                Phase::Release => match &throw {
                    Some(t) => {
                        let tf = local_t.min(t.flight_time);
                        RigidTransform::from_parts(t.position_at(tf, opts.throw.gravity).into(), object_at_release.rotation)
                    }
                    None => object_at_release,
                },
            };
            samples.push((plan.phase, chop, object));
        }
        phases.push(PhaseSummary { phase: plan.phase, duration: plan.duration, arc_length: plan.arc_length(po.dt), frames: samples.len() - before });
    }
    let roots: Vec<RigidTransform> = samples.iter().map(|(_, chop, _)| req.grip.hand_root(req.model, &chop.lower_frame())).collect();
    let start = req.arm_hint.q.map(|q| (req.arm_hint.swivel, q));
    let arm = arm_track(req.model, &roots, start, None).map_err(|e| {
        let phase = match e {
            Error::Unreachable(ref m) => m
                .rsplit(' ')
                .next()
                .and_then(|n| n.parse::<usize>().ok())
                .map_or(Phase::Approach, |n| samples[n.min(samples.len() - 1)].0),
            _ => Phase::Approach,
        };
        e.in_phase(phase.name())
    })?;
    for (i, (((phase, chop, object), root), sol)) in samples.into_iter().zip(roots).zip(arm).enumerate() {
        frames.push(TrajFrame {
            time: i as f64 * po.dt,
            phase,
            chop,
            hand_root: canonical_transform(&root),
            arm_q: sol.q,
            swivel: sol.swivel,
            object: canonical_transform(&object),
        });
    }
    Ok(TaskTrajectory {
        dt: po.dt,
        hand: req.model.name.clone(),
        morphology_hash: morphology_hash(req.model),
        style: req.grip.style.clone(),
        grip_q: req.grip.q.clone(),
        holding_offset: req.grip.holding_offset,
        object_id: req.object.id.clone(),
        phases,
        frames,
    })
}

/// Durations of the three phases of a trajectory.
pub fn phase_durations(t: &TaskTrajectory) -> [f64; 3] {
    let mut d = [0.0; 3];
    for (slot, p) in d.iter_mut().zip(&t.phases) {
        *slot = p.duration;
    }
    d
}

/// Throw parameters implied by a request, for reporting.
pub fn throw_plan_for(req: &TaskRequest, opts: &TaskOptions) -> Option<Result<ThrowPlan>> {
    match req.goal {
        Goal::Throw { target } => {
            let (lo, hi) = req.workspace;
            Some(plan_throw(release_point(&lo, &hi, req.table_height, &target, &opts.throw), &target, &opts.throw))
        }
        Goal::Move(_) => None,
    }
}
