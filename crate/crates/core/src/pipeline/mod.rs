//! Scene and task files, validation, seeded orchestration of grasp
//! selection and trajectory planning, and the demo task generator.
mod demo;
mod run;
mod scene;
mod seed;

pub use demo::{demo_task, DemoOptions};
pub use run::{
    environment_for, home_config, perturb_trajectory, run_pipeline, score_texts, GraspReport, ObjectReport, PhaseReport, PipelineOutput, PipelineReport,
    PipelineSetup, REPORT_FILE, REPORT_FORMAT,
};
pub use scene::{
    check_task, load_scene, load_task, lowest_point, objects_overlap, parse_scene, parse_task, validate_scene, write_scene, write_task,
    Diagnostics, Mode, SceneSpec, TaskSpec, TaskStep, SCENE_FORMAT, TASK_FORMAT,
};
pub use seed::{stream_rng, Stream};
