use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Translation3;
use rand::Rng;

use super::scene::{lowest_point, Mode, SceneSpec, TaskSpec, TaskStep};
use super::seed::{stream_rng, Stream};
use crate::error::{Error, Result};
use crate::geometry::{axis_angle, RigidTransform, Vec3};
use crate::grasp::Workspace;
use crate::object::{Primitive, RigidObject};

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOptions {
    pub objects: usize,
    /// Smallest centre distance between any two start or goal slots (m).
    pub separation: f64,
    /// Horizontal placement rectangle.
    pub region: ([f64; 2], [f64; 2]),
    pub noise_sigma: f64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self { objects: 8, separation: 0.08, region: ([-0.2, -0.2], [0.2, 0.2]), noise_sigma: 0.0 }
    }
}

fn random_primitive<R: Rng>(rng: &mut R) -> Primitive {
    match rng.random_range(0..3) {
        0 => Primitive::Sphere { radius: rng.random_range(0.005..=0.01) },
        1 => Primitive::Capsule { radius: rng.random_range(0.005..=0.01), length: rng.random_range(0.02..=0.04) },
        _ => Primitive::Box { size: [rng.random_range(0.01..=0.02), rng.random_range(0.01..=0.02), rng.random_range(0.01..=0.02)] },
    }
}

/// Objects resting on the table at random start slots, each moved to its own
/// random goal slot. No two slots are closer than `separation`.
pub fn demo_task(seed: u64, opts: &DemoOptions) -> Result<(SceneSpec, TaskSpec)> {
    let mut rng = stream_rng(seed, Stream::Demo, 0);
    let (lo, hi) = opts.region;
    let mut slots: Vec<[f64; 2]> = Vec::with_capacity(2 * opts.objects);
    let mut tries = 0;
    while slots.len() < 2 * opts.objects {
        tries += 1;
        if tries > 100_000 {
            return Err(Error::Invalid(format!("cannot place {} slots {} m apart", 2 * opts.objects, opts.separation)));
        }
        let p = [rng.random_range(lo[0]..=hi[0]), rng.random_range(lo[1]..=hi[1])];
        if slots.iter().all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= opts.separation) {
            slots.push(p);
        }
    }
    let mut objects = Vec::with_capacity(opts.objects);
    let mut steps = Vec::with_capacity(opts.objects);
    for i in 0..opts.objects {
        let primitive = random_primitive(&mut rng);
        let yaw = axis_angle(&Vec3::z(), rng.random_range(-PI..PI));
        // capsules lie on their side
        let rot = match primitive {
            Primitive::Capsule { .. } => yaw * axis_angle(&Vec3::x(), FRAC_PI_2),
            _ => yaw,
        };
        let id = format!("obj{i}");
        let mut o = RigidObject::new(id.clone(), primitive, RigidTransform::from_parts(Translation3::identity(), rot));
        let rest = -lowest_point(&o);
        let [x, y] = slots[i];
        o.pose.translation = Translation3::new(x, y, rest);
        let [gx, gy] = slots[opts.objects + i];
        steps.push(TaskStep { object: id, mode: Mode::Move, position: Vec3::new(gx, gy, rest), orientation: None });
        objects.push(o);
    }
    Ok((SceneSpec { table_height: 0.0, workspace: Workspace::default(), objects }, TaskSpec { steps, noise_sigma: opts.noise_sigma }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::validate_scene;

    #[test]
    fn demo_is_valid_and_reproducible() {
        let (scene, task) = demo_task(3, &DemoOptions::default()).unwrap();
        assert_eq!(scene.objects.len(), 8);
        assert_eq!(task.steps.len(), 8);
        let d = validate_scene(&scene);
        assert!(d.is_ok() && d.warnings.is_empty(), "{d:?}");
        for o in &scene.objects {
            assert!(lowest_point(o).abs() < 1e-12);
        }
        assert_eq!(demo_task(3, &DemoOptions::default()).unwrap(), (scene, task));
    }
}
