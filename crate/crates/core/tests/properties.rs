use std::f64::consts::PI;
use std::sync::OnceLock;

use chopsticks_core::bo::{GaussianProcess, Kernel};
use chopsticks_core::chopsticks::{ChopstickConfig, ChopstickSpec};
use chopsticks_core::geometry::{axis_angle, capsule_distance, clog, quat_angle, slerp, transform, Capsule, Quat, RigidTransform, Vec3};
use chopsticks_core::grasp::{continuity_score, discretize_orientations, rank_grasps, PsoOptions, RankOptions};
use chopsticks_core::grip::{ik_objective, solve_grip_ik, GripPose, IkOptions};
use chopsticks_core::hand::{pd_torque, preset, HandModel, PDGains, ARM_DOFS};
use chopsticks_core::object::{Primitive, RigidObject};
use chopsticks_core::pipeline::environment_for;
use chopsticks_core::styles::{enumerate_valid_styles, GrippingStyle};
use chopsticks_core::tracking::{reward, BodyState, SimFrame};
use chopsticks_core::trajectory::{arm_fk, arm_ik_at, swivel_angle};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn standard() -> &'static HandModel {
    static MODEL: OnceLock<HandModel> = OnceLock::new();
    MODEL.get_or_init(|| preset("standard").unwrap())
}

fn standard_grip() -> &'static GripPose {
    static GRIP: OnceLock<GripPose> = OnceLock::new();
    GRIP.get_or_init(|| solve_grip_ik(standard(), &GrippingStyle::standard(), &[0.5; 4], &IkOptions::default()).unwrap())
}

fn unit_vec() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalize())
}

fn rotation() -> impl Strategy<Value = Quat> {
    (unit_vec(), -PI..PI).prop_map(|(a, t)| axis_angle(&a, t))
}

fn point(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn capsule() -> impl Strategy<Value = Capsule> {
    (point(0.1), point(0.1), 0.001..0.03f64).prop_map(|(a, b, r)| Capsule::from_segment(a, b, r))
}

fn arm_q() -> impl Strategy<Value = Vec<f64>> {
    let lim = standard().limits();
    let ranges: Vec<_> = (0..ARM_DOFS)
        .map(|i| {
            let (lo, hi) = lim[i];
            // a bent elbow keeps the swivel angle defined
            if i == 3 {
                lo.max(0.1)..hi
            } else {
                lo..hi
            }
        })
        .collect();
    ranges
}

fn full_q() -> impl Strategy<Value = Vec<f64>> {
    standard().limits().into_iter().map(|(lo, hi)| lo..=hi).collect::<Vec<_>>()
}

/// Closest distance between two segments by dense sampling, refined around
/// the best coarse pair.
fn sampled_segment_distance(a: (Vec3, Vec3), b: (Vec3, Vec3)) -> f64 {
    let at = |s: (Vec3, Vec3), t: f64| s.0 + (s.1 - s.0) * t.clamp(0.0, 1.0);
    let n = 200;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n {
        for j in 0..=n {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            let d = (at(a, s) - at(b, t)).norm();
            if d < best.0 {
                best = (d, s, t);
            }
        }
    }
    let (_, s0, t0) = best;
    let w = 3.0 / n as f64;
    for i in 0..=n {
        for j in 0..=n {
            let s = s0 - w + 2.0 * w * i as f64 / n as f64;
            let t = t0 - w + 2.0 * w * j as f64 / n as f64;
            best.0 = best.0.min((at(a, s) - at(b, t)).norm());
        }
    }
    best.0
}

fn frame_with_object(obj: Vec3) -> SimFrame {
    let spec = ChopstickSpec::default();
    let chop = ChopstickConfig::new(Vec3::new(0.1, 0.0, 0.1), Quat::identity(), 0.1);
    SimFrame::at_rest(
        &spec,
        vec![0.1; 37],
        RigidTransform::identity(),
        chop,
        Some(BodyState::at_rest(&RigidTransform::translation(obj.x, obj.y, obj.z))),
        vec![0.0; 5],
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn quat_angle_triangle_inequality(a in rotation(), b in rotation(), c in rotation()) {
        prop_assert!(quat_angle(&a, &c) <= quat_angle(&a, &b) + quat_angle(&b, &c) + 1e-9);
    }

    #[test]
    fn clog_is_c1_and_positive_below_threshold(z0 in 1e-4..1.0f64, frac in 1e-3..0.999f64) {
        let h = z0 * 1e-5;
        let slope = (clog(z0 + h, z0).unwrap() - clog(z0 - h, z0).unwrap()) / (2.0 * h);
        prop_assert!(slope.abs() < 1e-6, "slope {slope}");
        prop_assert!(clog(frac * z0, z0).unwrap() > 0.0);
        prop_assert_eq!(clog(z0 * (1.0 + frac), z0).unwrap(), 0.0);
    }

    #[test]
    fn capsule_distance_is_symmetric_and_matches_sampling(a in capsule(), b in capsule()) {
        let ab = capsule_distance(&a, &b).distance;
        let ba = capsule_distance(&b, &a).distance;
        prop_assert!((ab - ba).abs() < 1e-12);
        let oracle = sampled_segment_distance(a.segment(), b.segment()) - a.radius - b.radius;
        prop_assert!((ab - oracle).abs() < 1e-4, "{ab} vs {oracle}");
    }

    #[test]
    fn slerp_angle_is_proportional(a in rotation(), b in rotation(), t in 0.0..1.0f64) {
        let theta = quat_angle(&a, &b);
        prop_assume!(theta < PI - 1e-3);
        prop_assert!((quat_angle(&a, &slerp(&a, &b, t)) - t * theta).abs() < 1e-9);
    }

    #[test]
    fn fk_preserves_bone_lengths(q in full_q()) {
        let m = standard();
        let fk = m.forward_kinematics(&q).unwrap();
        for (i, j) in m.joints.iter().enumerate() {
            if let Some(p) = j.parent {
                let bone = (fk.frames[i].translation.vector - fk.frames[p].translation.vector).norm();
                prop_assert!((bone - j.origin.translation.vector.norm()).abs() < 1e-9);
            }
            if let Some(link) = &j.link {
                let (a, b) = link.capsule(&fk.frames[i]).segment();
                prop_assert!(((b - a).norm() - link.length()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pd_torque_is_linear_below_saturation(
        e1 in prop::collection::vec(-0.1..0.1f64, 5),
        e2 in prop::collection::vec(-0.1..0.1f64, 5),
        v in prop::collection::vec(-1.0..1.0f64, 5),
        k in -2.0..2.0f64,
    ) {
        let g = PDGains::uniform(5, 3.0, 100.0);
        let zero = vec![0.0; 5];
        let tau = |e: &[f64], v: &[f64]| pd_torque(&g, e, &zero, v).unwrap().tau;
        let sum: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| a + b).collect();
        let scaled: Vec<f64> = e1.iter().map(|a| k * a).collect();
        let (t1, t2, t12) = (tau(&e1, &zero), tau(&e2, &zero), tau(&sum, &zero));
        let (ts, tv) = (tau(&scaled, &zero), tau(&zero, &v));
        let tboth = tau(&e1, &v);
        for i in 0..5 {
            prop_assert!((t12[i] - t1[i] - t2[i]).abs() < 1e-12);
            prop_assert!((ts[i] - k * t1[i]).abs() < 1e-12);
            prop_assert!((tboth[i] - t1[i] - tv[i]).abs() < 1e-12);
            prop_assert!((tv[i] + 0.3 * v[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn fingertip_distance_is_one_lipschitz(q in full_q(), a in point(0.3), b in point(0.3), finger in 0usize..5) {
        let m = standard();
        let (_, da) = m.fingertip_closest_point(&q, finger, &a).unwrap();
        let (_, db) = m.fingertip_closest_point(&q, finger, &b).unwrap();
        prop_assert!((da - db).abs() <= (a - b).norm() + 1e-12);
    }

    #[test]
    fn grip_objective_is_nonnegative(q in full_q(), x in prop::collection::vec(0.0..=1.0f64, 4)) {
        let (v, _) = ik_objective(standard(), &GrippingStyle::standard(), &x, &q, &IkOptions::default()).unwrap();
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn gp_variance_never_grows(
        xs in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 1..12),
        probe in prop::collection::vec(0.0..1.0f64, 2),
    ) {
        let mut gp = GaussianProcess::new(Kernel::default());
        let mut last = gp.predict(&probe).1;
        for (i, x) in xs.into_iter().enumerate() {
            if gp.add(x, (i as f64).sin()).is_err() {
                continue;
            }
            let var = gp.predict(&probe).1;
            prop_assert!(var <= last + 1e-12, "{var} > {last}");
            last = var;
        }
    }

    #[test]
    fn continuity_decreases_with_angle(cur in rotation(), axis in unit_vec(), a in 0.0..PI, b in 0.0..PI) {
        let (near, far) = if a <= b { (a, b) } else { (b, a) };
        let xi_near = continuity_score(&(cur * axis_angle(&axis, near)), &cur);
        let xi_far = continuity_score(&(cur * axis_angle(&axis, far)), &cur);
        prop_assert!(xi_near > 0.0 && xi_near <= 1.0);
        prop_assert!(xi_near >= xi_far);
    }

    #[test]
    fn reward_decreases_with_object_error(dir in unit_vec(), e in 0.0..0.05f64, extra in 1e-4..0.05f64) {
        let style = GrippingStyle::standard();
        let reference = frame_with_object(Vec3::new(0.1, 0.0, 0.02));
        let at = |err: f64| reward(&frame_with_object(Vec3::new(0.1, 0.0, 0.02) + dir * err), &reference, &style).r;
        let (r0, r1) = (at(e), at(e + extra));
        prop_assert!(r0 > 0.0 && r0 <= 1.0);
        prop_assert!(r1 < r0);
        prop_assert_eq!(reward(&reference, &reference, &style).r, 1.0);
    }

    #[test]
    fn arm_ik_round_trips(q in arm_q()) {
        let m = standard();
        let target = arm_fk(m, &q);
        let sols = arm_ik_at(m, &target, swivel_angle(m, &q)).unwrap();
        prop_assert!(!sols.is_empty());
        for s in sols {
            let back = arm_fk(m, &s.q);
            prop_assert!((back.translation.vector - target.translation.vector).norm() < 1e-6);
            prop_assert!(back.rotation.angle_to(&target.rotation) < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn ranked_totals_are_exact_products_on_the_grid(
        x in -0.2..0.2f64,
        y in -0.2..0.2f64,
        yaw in -PI..PI,
        radius in 0.005..0.01f64,
        current in rotation(),
        seed in any::<u64>(),
    ) {
        let m = standard();
        let grip = standard_grip();
        let obj = RigidObject::new("o", Primitive::Sphere { radius }, transform(Vec3::new(x, y, radius), axis_angle(&Vec3::z(), yaw)));
        let env = environment_for(0.0, &[], "o");
        let opts = RankOptions {
            grid_size: 300,
            keep: 300,
            pso: PsoOptions { swarms: 2, particles: 10, iterations: 5, ..PsoOptions::default() },
            ..RankOptions::default()
        };
        let grid = discretize_orientations(opts.grid_size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cands = rank_grasps(&obj, grip, m, &current, &env, &opts, &mut rng).unwrap();
        for c in &cands {
            prop_assert!((0.0..=1.0).contains(&c.total));
            prop_assert_eq!(c.total, c.quality * c.reachable * c.continuity);
            if let Some(i) = c.grid_index {
                prop_assert!(quat_angle(&c.config.orientation, &(obj.pose.rotation * grid[i])) < 1e-9);
            }
        }
        prop_assert!(cands.windows(2).all(|w| w[0].total >= w[1].total));
    }
}

#[test]
fn every_published_style_solves_within_joint_limits() {
    let m = standard();
    let lim = m.limits();
    for s in enumerate_valid_styles(5).unwrap() {
        let x = vec![0.5; s.contacting().len()];
        let a = solve_grip_ik(m, &s, &x, &IkOptions::default());
        let b = solve_grip_ik(m, &s, &x, &IkOptions::default());
        if let (Ok(a), Ok(b)) = (a, b) {
            assert_eq!(a.q, b.q, "{s} not deterministic");
            for (v, (lo, hi)) in a.q.iter().zip(&lim) {
                assert!(v >= lo && v <= hi, "{s}: {v} outside [{lo}, {hi}]");
            }
        }
    }
}
