use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chopsticks_core::bo::optimize_grip;
use chopsticks_core::config::{load_config, PlannerConfig};
use chopsticks_core::geometry::{Quat, Vec3};
use chopsticks_core::grasp::rank_grasps;
use chopsticks_core::grip::{load_pose, solve_grip_ik, GripPose};
use chopsticks_core::hand::{load_morphology, preset, HandModel, PRESET_NAMES};
use chopsticks_core::pipeline::{
    check_task, demo_task, environment_for, load_scene, load_task, run_pipeline, stream_rng, validate_scene, write_scene, write_task,
    DemoOptions, PipelineSetup, Stream,
};
use chopsticks_core::styles::{enumerate_valid_styles, GrippingStyle};
use chopsticks_core::tracking::score_frames;
use chopsticks_core::trajectory::{load_trajectory, plan_throw, release_point, to_sim_frames};
use nalgebra::Quaternion;

use crate::{Cli, Command, GraspCmd, GripCmd, Global, PlanArgs, ScoreArgs, StylesCmd, ThrowArgs, ValidateArgs};

fn hand(g: &Global) -> Result<HandModel> {
    if PRESET_NAMES.contains(&g.hand.as_str()) {
        Ok(preset(&g.hand)?)
    } else {
        load_morphology(&g.hand).with_context(|| format!("loading hand '{}'", g.hand))
    }
}

fn config(g: &Global) -> Result<PlannerConfig> {
    match &g.config {
        Some(p) => load_config(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(PlannerConfig::default()),
    }
}

fn vec3(v: &[f64], what: &str) -> Result<Vec3> {
    if v.len() != 3 {
        bail!("{what} needs 3 comma-separated numbers, got {}", v.len());
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn write_out(g: &Global, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(&g.out_dir)?;
    let path = g.out_dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Pose from a file, or mid-stick contacts for `style`.
fn grip_for(model: &HandModel, cfg: &PlannerConfig, pose: Option<&Path>, style: &str) -> Result<GripPose> {
    match pose {
        Some(p) => {
            let pose = load_pose(p).with_context(|| format!("loading pose {}", p.display()))?;
            pose.check_model(model)?;
            Ok(pose)
        }
        None => {
            let style: GrippingStyle = style.parse()?;
            let x = vec![0.5; style.contacting().len()];
            Ok(solve_grip_ik(model, &style, &x, &cfg.ik_options()).context("solving the default gripping pose")?)
        }
    }
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let g = &cli.global;
    match &cli.command {
        Command::Styles(StylesCmd::List { fingers }) => {
            let styles = enumerate_valid_styles(*fingers)?;
            for s in &styles {
                match s.name() {
                    Some(n) => println!("{s} {n}"),
                    None => println!("{s}"),
                }
            }
            println!("# {} valid styles", styles.len());
        }
        Command::Grip(GripCmd::Ik { style, x, holding_offset, out }) => {
            let model = hand(g)?;
            let cfg = config(g)?;
            let style: GrippingStyle = style.parse()?;
            let x = x.clone().unwrap_or_else(|| vec![0.5; style.contacting().len()]);
            let pose = solve_grip_ik(&model, &style, &x, &cfg.ik_options())?.with_holding_offset(*holding_offset)?;
            println!("residuals {:?}", pose.residuals);
            println!("penetration {}", pose.penetration);
            write_out(g, out, &pose.to_toml())?;
        }
        Command::Grip(GripCmd::Optimize { style, out }) => {
            let model = hand(g)?;
            let cfg = config(g)?;
            let style: GrippingStyle = style.parse()?;
            let search = optimize_grip(&model, &style, &cfg.evaluator(), &cfg.ik_options(), &cfg.bo_options(), &mut stream_rng(g.seed, Stream::Grip, 0))?;
            for (i, t) in search.trials.iter().enumerate() {
                println!("trial {i} x {:?} score {} feasible {}", t.x, t.score, t.feasible);
            }
            println!("best score {}", search.score);
            write_out(g, out, &search.pose.to_toml())?;
        }
        Command::Grasp(GraspCmd::Rank { object, id, grip, current_config }) => {
            let model = hand(g)?;
            let cfg = config(g)?;
            let scene = load_scene(object).with_context(|| format!("loading {}", object.display()))?;
            let target = match id {
                Some(id) => scene.object(id).with_context(|| format!("no object '{id}'"))?,
                None => scene.objects.first().context("the scene has no objects")?,
            };
            let grip = grip_for(&model, &cfg, grip.as_deref(), "1,1,1,2,0")?;
            let current = match current_config {
                Some(v) if v.len() == 4 => Quat::new_normalize(Quaternion::new(v[0], v[1], v[2], v[3])),
                Some(v) => bail!("--current-config needs w,x,y,z, got {} numbers", v.len()),
                None => Quat::identity(),
            };
            let env = environment_for(scene.table_height, &scene.objects, &target.id);
            let ranked = rank_grasps(target, &grip, &model, &current, &env, &cfg.rank_options(), &mut stream_rng(g.seed, Stream::Grasp, 0))?;
            println!("# rank grid_index total quality reachable continuity p_chop[3] o_chop[w x y z] phi");
            for (i, c) in ranked.iter().enumerate() {
                let (p, o) = (&c.config.position, &c.config.orientation);
                println!(
                    "{i} {} {} {} {} {} {} {} {} {} {} {} {} {}",
                    c.grid_index.map_or(-1, |v| v as i64),
                    c.total,
                    c.quality,
                    c.reachable,
                    c.continuity,
                    p.x,
                    p.y,
                    p.z,
                    o.w,
                    o.i,
                    o.j,
                    o.k,
                    c.config.phi
                );
            }
        }
        Command::Plan(args) => return plan(g, args),
        Command::ThrowPlan(args) => throw_plan(g, args)?,
        Command::Score(args) => score(args)?,
        Command::Validate(args) => return validate(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn plan(g: &Global, args: &PlanArgs) -> Result<ExitCode> {
    let model = hand(g)?;
    let cfg = config(g)?;
    let (scene, mut task) = if args.demo {
        let (scene, task) = demo_task(g.seed, &DemoOptions::default())?;
        write_out(g, "scene.toml", &write_scene(&scene))?;
        write_out(g, "task.toml", &write_task(&task))?;
        (scene, task)
    } else {
        let (s, t) = (args.scene.as_ref().expect("required"), args.task.as_ref().expect("required"));
        (
            load_scene(s).with_context(|| format!("loading {}", s.display()))?,
            load_task(t).with_context(|| format!("loading {}", t.display()))?,
        )
    };
    if let Some(sigma) = args.noise {
        if !(sigma >= 0.0) {
            bail!("--noise must be nonnegative");
        }
        task.noise_sigma = sigma;
    }
    let started = Instant::now();
    let grip = match &args.pose {
        Some(p) => grip_for(&model, &cfg, Some(p), &args.style)?,
        None => {
            let style: GrippingStyle = args.style.parse()?;
            let search = optimize_grip(&model, &style, &cfg.evaluator(), &cfg.ik_options(), &cfg.bo_options(), &mut stream_rng(g.seed, Stream::Grip, 0))?;
            log::info!("gripping pose score {}", search.score);
            write_out(g, "grip.toml", &search.pose.to_toml())?;
            search.pose
        }
    };
    let setup = PipelineSetup { model: &model, grip: &grip, config: &cfg, seed: g.seed, start: None };
    let out = run_pipeline(&scene, &task, &setup)?;
    out.write_to(&g.out_dir)?;
    for o in &out.report.objects {
        match (&o.error, o.score) {
            (Some(e), _) => println!("{} {}: failed: {e}", o.index, o.object),
            (None, Some(s)) => println!("{} {}: ok, score {s}", o.index, o.object),
            (None, None) => println!("{} {}: ok", o.index, o.object),
        }
    }
    println!("planned {} objects in {:.2?}, {} failed; report in {}", out.report.objects.len(), started.elapsed(), out.report.failures, g.out_dir.display());
    Ok(if out.all_ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn throw_plan(g: &Global, args: &ThrowArgs) -> Result<()> {
    let cfg = config(g)?;
    let opts = cfg.task_options().throw;
    let target = vec3(&args.target, "--target")?;
    let release = match &args.release {
        Some(r) => vec3(r, "--release")?,
        None => {
            let w = chopsticks_core::grasp::Workspace::default();
            release_point(&w.min, &w.max, 0.0, &target, &opts)
        }
    };
    let plan = plan_throw(release, &target, &opts)?;
    let landing = plan.position_at(plan.flight_time, opts.gravity);
    println!("release {} {} {}", plan.release.x, plan.release.y, plan.release.z);
    println!("velocity {} {} {}", plan.velocity.x, plan.velocity.y, plan.velocity.z);
    println!("speed {}", plan.velocity.norm());
    println!("flight_time {}", plan.flight_time);
    println!("landing_error {}", (landing - target).norm());
    Ok(())
}

fn score(args: &ScoreArgs) -> Result<()> {
    let sim = load_trajectory(&args.trajectory).with_context(|| format!("loading {}", args.trajectory.display()))?;
    let reference = match &args.reference {
        Some(r) => load_trajectory(r).with_context(|| format!("loading {}", r.display()))?,
        None => sim.clone(),
    };
    let r = score_frames(&to_sim_frames(&sim), &to_sim_frames(&reference), &reference.style)?;
    println!("score {}", r.average);
    let m = &r.mean_terms;
    println!("mean_terms hand {} chop {} object {} contact {}", m.r_hand, m.r_chop, m.r_obj, m.r_contact);
    println!("frames {}", r.per_frame.len());
    Ok(())
}

fn validate(args: &ValidateArgs) -> Result<ExitCode> {
    let scene = load_scene(&args.scene).with_context(|| format!("loading {}", args.scene.display()))?;
    let d = validate_scene(&scene);
    for w in &d.warnings {
        println!("warning: {w}");
    }
    for e in &d.errors {
        println!("error: {e}");
    }
    let mut ok = d.is_ok();
    if let Some(t) = &args.task {
        let task = load_task(t).with_context(|| format!("loading {}", t.display()))?;
        if let Err(e) = check_task(&scene, &task) {
            println!("error: {e}");
            ok = false;
        }
    }
    println!("{} objects, {} warnings, {} errors", scene.objects.len(), d.warnings.len(), d.errors.len() + usize::from(!ok && d.is_ok()));
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec3_needs_three_entries() {
        assert_eq!(vec3(&[1.0, 2.0, 3.0], "p").unwrap(), Vec3::new(1.0, 2.0, 3.0));
        assert!(vec3(&[1.0, 2.0], "p").unwrap_err().to_string().contains("p needs 3"));
    }
}
