use std::sync::OnceLock;

use chopsticks_core::config::PlannerConfig;
use chopsticks_core::geometry::quat_angle;
use chopsticks_core::grip::{solve_grip_ik, GripPose, IkOptions};
use chopsticks_core::hand::{preset, HandModel};
use chopsticks_core::pipeline::{
    demo_task, parse_scene, run_pipeline, score_texts, DemoOptions, PipelineOutput, PipelineReport, PipelineSetup, TaskSpec, REPORT_FILE,
};
use chopsticks_core::styles::GrippingStyle;
use chopsticks_core::trajectory::{arm_fk, parse_trajectory, MAX_SWIVEL_STEP};

fn model() -> &'static HandModel {
    static M: OnceLock<HandModel> = OnceLock::new();
    M.get_or_init(|| preset("standard").unwrap())
}

fn grip() -> &'static GripPose {
    static G: OnceLock<GripPose> = OnceLock::new();
    G.get_or_init(|| solve_grip_ik(model(), &GrippingStyle::standard(), &[0.5; 4], &IkOptions::default()).unwrap())
}

fn run(seed: u64, sigma: f64) -> PipelineOutput {
    let config = PlannerConfig::default();
    let (scene, task) = demo_task(seed, &DemoOptions { noise_sigma: sigma, ..DemoOptions::default() }).unwrap();
    let setup = PipelineSetup { model: model(), grip: grip(), config: &config, seed, start: None };
    run_pipeline(&scene, &task, &setup).unwrap()
}

fn file<'a>(out: &'a PipelineOutput, name: &str) -> &'a str {
    &out.files.iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("missing {name}")).1
}

/// Chain consistency and arm continuity of every frame in `text`.
fn check_frames(text: &str) {
    let t = parse_trajectory(text).unwrap();
    let (m, g) = (model(), grip());
    for (i, f) in t.frames.iter().enumerate() {
        let root = g.hand_root(m, &f.chop.lower_frame());
        assert!((root.translation.vector - f.hand_root.translation.vector).norm() < 1e-9, "frame {i}");
        assert!(quat_angle(&root.rotation, &f.hand_root.rotation) < 1e-9, "frame {i}");
        let arm = arm_fk(m, &f.arm_q);
        assert!((arm.translation.vector - root.translation.vector).norm() < 1e-6, "frame {i}");
        assert!(quat_angle(&arm.rotation, &root.rotation) < 1e-6, "frame {i}");
    }
    for (i, w) in t.frames.windows(2).enumerate() {
        let d = (w[1].swivel - w[0].swivel + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        assert!(d.abs() <= MAX_SWIVEL_STEP + 1e-12, "swivel step {d} at frame {}", i + 1);
    }
}

#[test]
fn eight_object_demo_emits_three_phases_each() {
    let out = run(4, 0.0);
    assert!(out.all_ok(), "{}", out.report.to_toml());
    assert_eq!(out.report.objects.len(), 8);
    assert_eq!(out.files.len(), 8);
    for o in &out.report.objects {
        let names: Vec<&str> = o.phases.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["approach", "relocate", "release"]);
        assert_eq!(o.score, Some(1.0));
        let text = file(&out, o.trajectory.as_deref().unwrap());
        let t = parse_trajectory(text).unwrap();
        assert_eq!(t.frames.len(), o.phases.iter().map(|p| p.frames).sum::<usize>());
        check_frames(text);
    }
}

#[test]
fn noisy_runs_are_reproducible_and_score_against_the_replan() {
    let a = run(2, 0.003);
    let b = run(2, 0.003);
    assert_eq!(a, b);
    assert!(a.all_ok(), "{}", a.report.to_toml());
    assert_eq!(a.files.len(), 16);
    for o in &a.report.objects {
        let noise = o.noise.unwrap();
        assert!(noise.iter().any(|v| *v != 0.0));
        let noisy = file(&a, o.trajectory.as_deref().unwrap());
        let clean = file(&a, o.replan.as_deref().unwrap());
        let score = o.score.unwrap();
        assert!(score > 0.0 && score < 1.0);
        assert!((score_texts(noisy, clean).unwrap() - score).abs() <= 1e-12);
        check_frames(noisy);
        check_frames(clean);
    }
    // the noise-free plan equals the plan made without noise
    let quiet = run(2, 0.0);
    for (o, q) in a.report.objects.iter().zip(&quiet.report.objects) {
        assert_eq!(file(&a, o.replan.as_deref().unwrap()), file(&quiet, q.trajectory.as_deref().unwrap()));
    }
    let other = run(3, 0.003);
    assert_ne!(a.report.objects[0].noise, other.report.objects[0].noise);
}

#[test]
fn empty_task_gives_an_empty_report() {
    let config = PlannerConfig::default();
    let (scene, _) = demo_task(1, &DemoOptions::default()).unwrap();
    let setup = PipelineSetup { model: model(), grip: grip(), config: &config, seed: 1, start: None };
    let out = run_pipeline(&scene, &TaskSpec { steps: vec![], noise_sigma: 0.0 }, &setup).unwrap();
    assert!(out.all_ok());
    assert!(out.report.objects.is_empty());
    assert!(out.files.is_empty());
}

#[test]
fn written_outputs_round_trip() {
    let out = run(5, 0.0);
    let dir = tempfile::tempdir().unwrap();
    out.write_to(dir.path()).unwrap();
    let report = PipelineReport::parse(&std::fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(report, out.report);
    for (name, text) in &out.files {
        assert_eq!(&std::fs::read_to_string(dir.path().join(name)).unwrap(), text);
    }
}

#[test]
fn overlapping_scene_is_rejected() {
    let text = r#"
format = "scene/1"
table_height = 0.0

[[object]]
id = "a"
shape = "box"
size = [0.02, 0.02, 0.02]
position = [0.0, 0.0, 0.01]

[[object]]
id = "b"
shape = "box"
size = [0.02, 0.02, 0.02]
position = [0.01, 0.0, 0.01]
"#;
    let scene = parse_scene(text).unwrap();
    let (_, task) = demo_task(1, &DemoOptions::default()).unwrap();
    let config = PlannerConfig::default();
    let setup = PipelineSetup { model: model(), grip: grip(), config: &config, seed: 1, start: None };
    assert!(run_pipeline(&scene, &task, &setup).is_err());
}
