use std::path::Path;
use std::time::Instant;

use nalgebra::Translation3;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::scene::{check_task, validate_scene, Mode, SceneSpec, TaskSpec, TaskStep};
use super::seed::{stream_rng, Stream};
use crate::chopsticks::ChopstickConfig;
use crate::config::PlannerConfig;
use crate::error::{Error, Result};
use crate::geometry::{canonical_transform, HalfSpace, RigidTransform, Shape, Vec3};
use crate::grasp::{discretize_orientations, rank_grasps, reachability, GraspCandidate};
use crate::grip::GripPose;
use crate::hand::HandModel;
use crate::object::RigidObject;
use crate::tracking::score_frames;
use crate::trajectory::{
    arm_track, assemble_task, parse_trajectory, to_sim_frames, write_trajectory, ArmHint, Environment, TaskRequest, TaskTrajectory,
};

pub const REPORT_FORMAT: &str = "report/1";
pub const REPORT_FILE: &str = "report.toml";

/// Everything but the scene and task.
#[derive(Debug, Clone, Copy)]
pub struct PipelineSetup<'a> {
    pub model: &'a HandModel,
    pub grip: &'a GripPose,
    pub config: &'a PlannerConfig,
    pub seed: u64,
    /// Initial chopstick configuration; a reachable one above the cuboid
    /// centre is chosen when absent.
    pub start: Option<ChopstickConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub name: String,
    /// Planned duration (s).
    pub duration: f64,
    pub arc_length: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspReport {
    /// Position in the ranked list of the candidate that was planned.
    pub rank: usize,
    pub grid_index: usize,
    pub quality: f64,
    pub reachable: f64,
    pub continuity: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectReport {
    pub index: usize,
    pub object: String,
    pub mode: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grasp: Option<GraspReport>,
    /// Offset added to the grasp position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phases: Vec<PhaseReport>,
    /// Tracking score of the emitted trajectory against the noise-free plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    /// Noise-free plan, emitted only when noise is injected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replan: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub format: String,
    pub seed: u64,
    pub hand: String,
    pub style: String,
    pub noise_sigma: f64,
    pub failures: usize,
    #[serde(default, rename = "object")]
    pub objects: Vec<ObjectReport>,
}

impl PipelineReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| crate::config::toml_error(text, &e))
    }
}

/// The report plus every emitted file as `(name, contents)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub report: PipelineReport,
    pub files: Vec<(String, String)>,
}

impl PipelineOutput {
    pub fn all_ok(&self) -> bool {
        self.report.failures == 0
    }

    /// Writes the trajectories and `report.toml` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        std::fs::write(dir.join(REPORT_FILE), self.report.to_toml())?;
        Ok(())
    }
}

/// Table plus every object except `skip`.
pub fn environment_for(table_height: f64, objects: &[RigidObject], skip: &str) -> Environment {
    let mut obstacles = vec![Shape::HalfSpace(HalfSpace { height: table_height })];
    obstacles.extend(objects.iter().filter(|o| o.id != skip).map(RigidObject::shape));
    Environment { obstacles }
}

/// First grid orientation that is reachable with the tips above the centre
/// of the cuboid's top face.
pub fn home_config(model: &HandModel, grip: &GripPose, scene: &SceneSpec, grid_size: usize) -> Result<ChopstickConfig> {
    let w = &scene.workspace;
    let p = Vec3::new(0.5 * (w.min.x + w.max.x), 0.5 * (w.min.y + w.max.y), w.max.z);
    let env = environment_for(scene.table_height, &scene.objects, "");
    discretize_orientations(grid_size)
        .into_iter()
        .map(|o| ChopstickConfig::new(p, o, grip.grip_phi))
        .find(|c| reachability(c, grip, model, &env))
        .ok_or_else(|| Error::Unreachable("no reachable start configuration above the cuboid".into()))
}

struct Planned {
    trajectory: TaskTrajectory,
    rank: usize,
    candidate: GraspCandidate,
}

struct ObjectState<'a> {
    setup: &'a PipelineSetup<'a>,
    scene: &'a SceneSpec,
    current: ChopstickConfig,
    hint: ArmHint,
}

impl ObjectState<'_> {
    fn request<'r>(
        &'r self,
        object: &'r RigidObject,
        env: &'r Environment,
        step: &TaskStep,
        grasp: ChopstickConfig,
    ) -> TaskRequest<'r> {
        TaskRequest {
            model: self.setup.model,
            grip: self.setup.grip,
            object,
            start: self.current,
            grasp,
            goal: step.goal(&object.pose),
            environment: env,
            table_height: self.scene.table_height,
            workspace: (self.scene.workspace.min, self.scene.workspace.max),
            arm_hint: self.hint,
            durations: None,
        }
    }

    /// Ranks grasps and plans the best candidate that admits a full plan.
    /// When none of the kept candidates is reachable the quality cut is
    /// widened tenfold, up to the whole grid.
    fn plan(&self, index: u32, step: &TaskStep, object: &RigidObject, env: &Environment) -> Result<Planned> {
        let s = self.setup;
        let opts = s.config.task_options();
        let mut rank_opts = s.config.rank_options();
        let ranked = loop {
            let r = rank_grasps(object, s.grip, s.model, &self.current.orientation, env, &rank_opts, &mut stream_rng(s.seed, Stream::Grasp, index));
            match r {
                Err(Error::NoReachableGrasp { candidates }) if candidates > 0 && rank_opts.keep < rank_opts.grid_size => {
                    rank_opts.keep = (rank_opts.keep * 10).min(rank_opts.grid_size);
                    log::debug!("{}: widening the grasp shortlist to {}", object.id, rank_opts.keep);
                }
                r => break r?,
            }
        };
        let mut rng = stream_rng(s.seed, Stream::Plan, index);
        let mut last = Error::NoReachableGrasp { candidates: ranked.len() };
        for (rank, c) in ranked.into_iter().enumerate().filter(|(_, c)| c.total > 0.0) {
            match assemble_task(&self.request(object, env, step, c.config), &opts, &mut rng) {
                Ok(trajectory) => return Ok(Planned { trajectory, rank, candidate: c }),
                Err(e) => {
                    log::debug!("{}: candidate {rank} failed: {e}", object.id);
                    last = e;
                }
            }
        }
        Err(last)
    }
}

/// Adds `offset` to the chopstick reference point of every frame, ramped in
/// linearly over the approach so the run starts where the previous one
/// ended. Hand root and arm joints follow; the object reference does not.
pub fn perturb_trajectory(t: &TaskTrajectory, model: &HandModel, grip: &GripPose, offset: &Vec3) -> Result<TaskTrajectory> {
    let ramp = t.phases.first().map_or(0, |p| p.frames.saturating_sub(1)).max(1) as f64;
    let mut out = t.clone();
    let start = t.frames.first().map(|f| (f.swivel, f.arm_q));
    let mut roots = Vec::with_capacity(out.frames.len());
    for (i, f) in out.frames.iter_mut().enumerate() {
        let w = (i as f64 / ramp).min(1.0);
        f.chop.position += offset * w;
        roots.push(grip.hand_root(model, &f.chop.lower_frame()));
    }
    let guide: Vec<_> = t.frames.iter().map(|f| f.arm_q).collect();
    let arm = arm_track(model, &roots, start, Some(&guide))?;
    for ((f, root), sol) in out.frames.iter_mut().zip(roots).zip(arm) {
        f.hand_root = canonical_transform(&root);
        f.arm_q = sol.q;
        f.swivel = sol.swivel;
    }
    Ok(out)
}

fn phase_reports(t: &TaskTrajectory) -> Vec<PhaseReport> {
    t.phases
        .iter()
        .map(|p| PhaseReport { name: p.phase.name().into(), duration: p.duration, arc_length: p.arc_length, frames: p.frames })
        .collect()
}

/// Mean tracking reward of `emitted` against `reference`, computed from the
/// text forms so it matches a later recomputation from the files.
pub fn score_texts(emitted: &str, reference: &str) -> Result<f64> {
    let a = parse_trajectory(emitted)?;
    let b = parse_trajectory(reference)?;
    Ok(score_frames(&to_sim_frames(&a), &to_sim_frames(&b), &b.style)?.average)
}

/// Plans every task step in order, chaining each start from the previous
/// end. Step failures are recorded and the remaining steps still run.
pub fn run_pipeline(scene: &SceneSpec, task: &TaskSpec, setup: &PipelineSetup) -> Result<PipelineOutput> {
    let diag = validate_scene(scene);
    if !diag.is_ok() {
        return Err(Error::Invalid(diag.errors.join("; ")));
    }
    for w in &diag.warnings {
        log::warn!("{w}");
    }
    check_task(scene, task)?;
    setup.grip.check_model(setup.model)?;
    let sigma = task.noise_sigma;
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Invalid(e.to_string()))?;

    let mut objects = scene.objects.clone();
    let mut report = PipelineReport {
        format: REPORT_FORMAT.into(),
        seed: setup.seed,
        hand: setup.model.name.clone(),
        style: setup.grip.style.to_string(),
        noise_sigma: sigma,
        failures: 0,
        objects: Vec::new(),
    };
    let mut files = Vec::new();
    if task.steps.is_empty() {
        return Ok(PipelineOutput { report, files });
    }
    let mut current = match setup.start {
        Some(c) => c,
        None => home_config(setup.model, setup.grip, scene, setup.config.grasp.grid_size)?,
    };
    let mut hint = ArmHint::default();
    
    for (i, step) in task.steps.iter().enumerate() {
        let started = Instant::now();
        let index = i as u32;
        let object = objects.iter().find(|o| o.id == step.object).expect("checked").clone();
        let env = environment_for(scene.table_height, &objects, &object.id);
        let state = ObjectState { setup, scene, current, hint };
        let mut entry = ObjectReport {
            index: i,
            object: object.id.clone(),
            mode: if step.mode == Mode::Move { "move" } else { "throw" }.into(),
            ok: false,
            error: None,
            grasp: None,
            noise: None,
            phases: Vec::new(),
            score: None,
            trajectory: None,
            replan: None,
        };
        let outcome = state.plan(index, step, &object, &env).and_then(|p| {
            let clean = write_trajectory(&p.trajectory);
            if sigma > 0.0 {
                let mut rng = stream_rng(setup.seed, Stream::Noise, index);
                let offset = Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
                let noisy_text = write_trajectory(&perturb_trajectory(&p.trajectory, setup.model, setup.grip, &offset)?);
                let score = score_texts(&noisy_text, &clean)?;
                Ok((p, noisy_text, Some(clean), Some(offset), score))
            } else {
                let score = score_texts(&clean, &clean)?;
                Ok((p, clean, None, None, score))
            }
        });
        match outcome {
            Ok((p, text, replan, offset, score)) => {
                let stem = format!("{i:02}_{}", object.id);
                let c = &p.candidate;
                entry.ok = true;
                entry.grasp = Some(GraspReport {
                    rank: p.rank,
                    grid_index: c.grid_index.unwrap_or(0),
                    quality: c.quality,
                    reachable: c.reachable,
                    continuity: c.continuity,
                    total: c.total,
                });
                entry.noise = offset.map(Into::into);
                entry.phases = phase_reports(&p.trajectory);
                entry.score = Some(score);
                entry.trajectory = Some(format!("{stem}.traj"));
                files.push((format!("{stem}.traj"), text));
                if let Some(r) = replan {
                    entry.replan = Some(format!("{stem}.replan.traj"));
                    files.push((format!("{stem}.replan.traj"), r));
                }
                current = p.trajectory.final_config().expect("plans have frames");
                hint = p.trajectory.final_arm();
                let landed = match step.mode {
                    Mode::Move => match step.goal(&object.pose) {
                        crate::trajectory::Goal::Move(g) => g,
                        _ => unreachable!(),
                    },
                    Mode::Throw => RigidTransform::from_parts(Translation3::from(step.position), object.pose.rotation),
                };
                if let Some(o) = objects.iter_mut().find(|o| o.id == object.id) {
                    o.pose = landed;
                }
                log::info!("{}: planned in {:.2?}, score {score}", object.id, started.elapsed());
            }
            Err(e) => {
                log::warn!("{}: {e}", object.id);
                entry.error = Some(e.to_string());
                report.failures += 1;
            }
        }
        report.objects.push(entry);
    }
    Ok(PipelineOutput { report, files })
}
