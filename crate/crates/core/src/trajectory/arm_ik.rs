use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};

use crate::error::{Error, Result};
use crate::geometry::{any_orthogonal, RigidTransform, Vec3};
use crate::hand::{HandModel, ARM_DOFS};

/// Seven arm angles (shoulder z, y, x; elbow; wrist x, y, z) and the swivel
/// angle of the elbow about the shoulder-wrist line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmIkSolution {
    pub q: [f64; ARM_DOFS],
    pub swivel: f64,
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Both (z, y, x) decompositions of `r = Rz(a) Ry(b) Rx(c)`.
fn euler_zyx(r: &Matrix3<f64>) -> [[f64; 3]; 2] {
    let b = (-r[(2, 0)]).atan2((r[(0, 0)].powi(2) + r[(1, 0)].powi(2)).sqrt());
    let (a, c) = if b.cos() > 1e-12 {
        (r[(1, 0)].atan2(r[(0, 0)]), r[(2, 1)].atan2(r[(2, 2)]))
    } else {
        // gimbal lock: put everything into a
        ((-r[(0, 1)]).atan2(r[(1, 1)]), 0.0)
    };
    [[a, b, c], [wrap(a + PI), wrap(PI - b), wrap(c + PI)]]
}

/// Both (x, y, z) decompositions of `r = Rx(a) Ry(b) Rz(c)`.
fn euler_xyz(r: &Matrix3<f64>) -> [[f64; 3]; 2] {
    let b = r[(0, 2)].atan2((r[(0, 0)].powi(2) + r[(0, 1)].powi(2)).sqrt());
    let (a, c) = if b.cos() > 1e-12 {
        ((-r[(1, 2)]).atan2(r[(2, 2)]), (-r[(0, 1)]).atan2(r[(0, 0)]))
    } else {
        (r[(2, 1)].atan2(r[(1, 1)]), 0.0)
    };
    [[a, b, c], [wrap(a + PI), wrap(PI - b), wrap(c + PI)]]
}

/// Reference directions for measuring swivel around the unit axis `a`:
/// `r1` is shoulder-frame down projected off the axis.
fn swivel_basis(a: &Vec3) -> (Vec3, Vec3) {
    let down = -Vec3::z();
    let p = down - a * a.dot(&down);
    let r1 = if p.norm() > 1e-9 { p.normalize() } else { any_orthogonal(a) };
    (r1, a.cross(&r1))
}

/// Hand-root transform for the arm angles `q` (first seven entries used).
pub fn arm_fk(model: &HandModel, q: &[f64]) -> RigidTransform {
    let (l1, l2) = model.arm_lengths();
    let rz = |t: f64| UnitQuaternion::from_axis_angle(&Vec3::z_axis(), t);
    let ry = |t: f64| UnitQuaternion::from_axis_angle(&Vec3::y_axis(), t);
    let rx = |t: f64| UnitQuaternion::from_axis_angle(&Vec3::x_axis(), t);
    let step = |rot: UnitQuaternion<f64>| RigidTransform::from_parts(Default::default(), rot);
    model.shoulder()
        * step(rz(q[0]) * ry(q[1]) * rx(q[2]))
        * RigidTransform::translation(l1, 0.0, 0.0)
        * step(rz(q[3]))
        * RigidTransform::translation(l2, 0.0, 0.0)
        * step(rx(q[4]) * ry(q[5]) * rz(q[6]))
}

/// Swivel angle of the arm configuration `q`.
pub fn swivel_angle(model: &HandModel, q: &[f64]) -> f64 {
    let (l1, _) = model.arm_lengths();
    let shoulder = Rotation3::from_axis_angle(&Vec3::z_axis(), q[0])
        * Rotation3::from_axis_angle(&Vec3::y_axis(), q[1])
        * Rotation3::from_axis_angle(&Vec3::x_axis(), q[2]);
    let elbow = shoulder * Vec3::new(l1, 0.0, 0.0);
    let wrist = (model.shoulder().inverse() * arm_fk(model, q)).translation.vector;
    let a = wrist.normalize();
    let v = elbow - a * a.dot(&elbow);
    if v.norm() < 1e-12 {
        return 0.0;
    }
    let (r1, r2) = swivel_basis(&a);
    v.dot(&r2).atan2(v.dot(&r1))
}

fn within(model: &HandModel, q: &[f64; ARM_DOFS]) -> bool {
    model.limits().iter().zip(q).all(|((lo, hi), v)| *v >= lo - 1e-12 && *v <= hi + 1e-12)
}

/// All limit-respecting solutions at exactly `swivel`.
pub fn arm_ik_at(model: &HandModel, target: &RigidTransform, swivel: f64) -> Result<Vec<ArmIkSolution>> {
    let (l1, l2) = model.arm_lengths();
    let local = model.shoulder().inverse() * target;
    let w = local.translation.vector;
    let d = w.norm();
    if d > l1 + l2 + 1e-12 || d < (l1 - l2).abs() - 1e-12 || d < 1e-12 {
        return Err(Error::Unreachable(format!(
            "wrist at {d:.4} m from the shoulder; reach is [{:.4}, {:.4}] m",
            (l1 - l2).abs(),
            l1 + l2
        )));
    }
    let cos_e = ((d * d - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let elbow_angle = cos_e.acos();
    let cos_a = ((l1 * l1 + d * d - l2 * l2) / (2.0 * l1 * d)).clamp(-1.0, 1.0);
    let sin_a = (1.0 - cos_a * cos_a).sqrt();
    let a = w / d;
    let (r1, r2) = swivel_basis(&a);
    let n = swivel.cos() * r1 + swivel.sin() * r2;
    let e = l1 * (cos_a * a + sin_a * n);
    let ex = e / l1;
    let sin_e = elbow_angle.sin();
    let ey = if sin_e > 1e-9 { ((w - e) / l2 - cos_e * ex) / sin_e } else { n - ex * ex.dot(&n) };
    let ey = (ey - ex * ex.dot(&ey)).normalize();
    let ez = ex.cross(&ey);
    let upper = Matrix3::from_columns(&[ex, ey, ez]);
    let forearm = upper * Rotation3::from_axis_angle(&Vec3::z_axis(), elbow_angle).matrix();
    let wrist = forearm.transpose() * local.rotation.to_rotation_matrix().matrix();

    let mut out = Vec::new();
    for s in euler_zyx(&upper) {
        for w in euler_xyz(&wrist) {
            let q = [s[0], s[1], s[2], elbow_angle, w[0], w[1], w[2]];
            if within(model, &q) {
                out.push(ArmIkSolution { q, swivel });
            }
        }
    }
    Ok(out)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| wrap(x - y).powi(2)).sum::<f64>()
}

const SWIVEL_STEP: f64 = 0.01;

/// Solves the arm for a hand-root `target`, preferring the swivel closest to
/// `swivel_hint` and, among branches, the one closest to `q_hint`.
pub fn arm_ik(model: &HandModel, target: &RigidTransform, swivel_hint: f64, q_hint: Option<&[f64]>) -> Result<ArmIkSolution> {
    let steps = (PI / SWIVEL_STEP).ceil() as usize;
    for k in 0..=steps {
        for sign in [1.0, -1.0] {
            if k == 0 && sign < 0.0 {
                continue;
            }
            let swivel = wrap(swivel_hint + sign * k as f64 * SWIVEL_STEP);
            let sols = arm_ik_at(model, target, swivel)?;
            let best = match q_hint {
                Some(h) => sols.into_iter().min_by(|x, y| distance(&x.q, h).total_cmp(&distance(&y.q, h))),
                None => sols.into_iter().next(),
            };
            if let Some(s) = best {
                return Ok(s);
            }
        }
    }
    Err(Error::Unreachable("no joint-limit-respecting arm solution".into()))
}

/// Largest swivel change between consecutive tracked frames (rad).
pub const MAX_SWIVEL_STEP: f64 = 0.1;
/// Largest per-joint change between consecutive tracked frames (rad).
pub const MAX_JOINT_STEP: f64 = 0.5;
const TRACK_CELLS: usize = 315;
const TRACK_REACH: i64 = 5;
// Joints closer than this to a limit pay a quadratic cost, so tracked motions
// do not end pinned against a limit the next motion has to leave.
const LIMIT_MARGIN: f64 = 0.25;

struct TrackState {
    cell: usize,
    q: [f64; ARM_DOFS],
    cost: f64,
    prev: usize,
}

fn margin_cost(q: &[f64], limits: &[(f64, f64)]) -> f64 {
    q.iter()
        .zip(limits)
        .map(|(v, (lo, hi))| (LIMIT_MARGIN - (v - lo).min(hi - v)).max(0.0).powi(2))
        .sum()
}

fn joint_step(a: &[f64], b: &[f64]) -> Option<f64> {
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = wrap(x - y);
        if d.abs() > MAX_JOINT_STEP {
            return None;
        }
        sq += d * d;
    }
    Some(sq)
}

/// Arm solutions along `targets` with every swivel step within
/// [`MAX_SWIVEL_STEP`] and every joint step within [`MAX_JOINT_STEP`],
/// minimizing swivel travel, squared joint motion and closeness to joint
/// limits. Swivels are searched
/// on a uniform grid by dynamic programming. `start` is the state before the
/// first target, which the first solution must connect to. With a `guide`,
/// squared distance to the guide's joints at each frame is also minimized.
pub fn arm_track(
    model: &HandModel,
    targets: &[RigidTransform],
    start: Option<(f64, [f64; ARM_DOFS])>,
    guide: Option<&[[f64; ARM_DOFS]]>,
) -> Result<Vec<ArmIkSolution>> {
    let cell_width = 2.0 * PI / TRACK_CELLS as f64;
    debug_assert!(TRACK_REACH as f64 * cell_width <= MAX_SWIVEL_STEP);
    let swivel_of = |c: usize| wrap(-PI + c as f64 * cell_width);
    let limits = model.limits();
    let mut layers: Vec<Vec<TrackState>> = Vec::with_capacity(targets.len());
    let mut by_cell: Vec<Vec<usize>> = vec![Vec::new(); TRACK_CELLS];
    for (t, target) in targets.iter().enumerate() {
        if t > 0 {
            by_cell.iter_mut().for_each(Vec::clear);
            for (i, p) in layers[t - 1].iter().enumerate() {
                by_cell[p.cell].push(i);
            }
        }
        let mut layer = Vec::new();
        for cell in 0..TRACK_CELLS {
            let swivel = swivel_of(cell);
            for sol in arm_ik_at(model, target, swivel)? {
                let entry = if t == 0 {
                    match start {
                        None => Some((0.0, usize::MAX)),
                        Some((s0, q0)) if wrap(swivel - s0).abs() <= MAX_SWIVEL_STEP + 1e-12 => {
                            joint_step(&sol.q, &q0).map(|j| (wrap(swivel - s0).abs() + j, usize::MAX))
                        }
                        Some(_) => None,
                    }
                } else {
                    let prev = &layers[t - 1];
                    let mut best: Option<(f64, usize)> = None;
                    for off in -TRACK_REACH..=TRACK_REACH {
                        let pc = (cell as i64 + off).rem_euclid(TRACK_CELLS as i64) as usize;
                        for &i in &by_cell[pc] {
                            let p = &prev[i];
                            if let Some(j) = joint_step(&sol.q, &p.q) {
                                let c = p.cost + off.abs() as f64 * cell_width + j;
                                if best.is_none_or(|(b, _)| c < b) {
                                    best = Some((c, i));
                                }
                            }
                        }
                    }
                    best
                };
                if let Some((cost, prev)) = entry {
                    let mut cost = cost + margin_cost(&sol.q, &limits);
                    if let Some(g) = guide.and_then(|g| g.get(t)) {
                        cost += sol.q.iter().zip(g).map(|(a, b)| wrap(a - b).powi(2)).sum::<f64>();
                    }
                    layer.push(TrackState { cell, q: sol.q, cost, prev });
                }
            }
        }
        if layer.is_empty() {
            return Err(Error::Unreachable(format!("no continuous arm motion reaches frame {t}")));
        }
        layers.push(layer);
    }
    let Some(last) = layers.last() else {
        return Ok(Vec::new());
    };
    let mut i = (0..last.len()).min_by(|a, b| last[*a].cost.total_cmp(&last[*b].cost)).expect("nonempty");
    let mut out = vec![ArmIkSolution { q: [0.0; ARM_DOFS], swivel: 0.0 }; layers.len()];
    for t in (0..layers.len()).rev() {
        let s = &layers[t][i];
        out[t] = ArmIkSolution { q: s.q, swivel: swivel_of(s.cell) };
        i = s.prev;
    }
    Ok(out)
}

/// True when some limit-respecting arm solution reaches `target`.
pub fn reachable(model: &HandModel, target: &RigidTransform) -> bool {
    arm_ik(model, target, 0.0, None).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::preset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(model: &HandModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let lim = model.limits();
        (0..ARM_DOFS)
            .map(|i| {
                let (lo, hi) = lim[i];
                let lo = if i == 3 { lo.max(0.1) } else { lo };
                rng.random_range(lo..hi)
            })
            .collect()
    }

    #[test]
    fn fk_matches_model_chain() {
        let model = preset("standard").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let mut q = model.rest_pose();
            q[..ARM_DOFS].copy_from_slice(&sample(&model, &mut rng));
            let fk = model.forward_kinematics(&q).unwrap();
            let mine = arm_fk(&model, &q);
            assert!((fk.frames[2].translation.vector - mine.translation.vector).norm() < 1e-12);
            assert!(fk.frames[2].rotation.angle_to(&mine.rotation) < 1e-9);
        }
    }

    #[test]
    fn round_trip_with_matching_swivel() {
        let model = preset("standard").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let q = sample(&model, &mut rng);
            let target = arm_fk(&model, &q);
            let sols = arm_ik_at(&model, &target, swivel_angle(&model, &q)).unwrap();
            assert!(!sols.is_empty(), "{q:?}");
            for s in sols {
                let back = arm_fk(&model, &s.q);
                assert!((back.translation.vector - target.translation.vector).norm() < 1e-9);
                assert!(back.rotation.angle_to(&target.rotation) < 1e-9);
            }
        }
    }

    #[test]
    fn tracked_path_is_continuous() {
        let model = preset("standard").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut tracked = 0;
        for _ in 0..5 {
            let (a, b) = (sample(&model, &mut rng), sample(&model, &mut rng));
            let n = 80;
            let targets: Vec<_> = (0..n)
                .map(|k| {
                    let u = k as f64 / (n - 1) as f64;
                    let q: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + u * (y - x)).collect();
                    arm_fk(&model, &q)
                })
                .collect();
            let Ok(path) = arm_track(&model, &targets, None, None) else { continue };
            tracked += 1;
            for (s, t) in path.iter().zip(&targets) {
                let back = arm_fk(&model, &s.q);
                assert!((back.translation.vector - t.translation.vector).norm() < 1e-9);
                assert!(within(&model, &s.q));
            }
            for w in path.windows(2) {
                assert!(wrap(w[1].swivel - w[0].swivel).abs() <= MAX_SWIVEL_STEP + 1e-12);
                assert!(joint_step(&w[1].q, &w[0].q).is_some());
            }
        }
        assert!(tracked >= 3, "{tracked}");
        let far = model.shoulder() * RigidTransform::translation(1.0, 0.0, 0.0);
        assert!(matches!(arm_track(&model, &[far], None, None), Err(Error::Unreachable(_))));
    }

    #[test]
    fn straight_arm_and_out_of_reach() {
        let model = preset("standard").unwrap();
        let (l1, l2) = model.arm_lengths();
        let s = model.shoulder();
        let target = s * RigidTransform::translation(l1 + l2, 0.0, 0.0);
        let sol = arm_ik(&model, &target, 0.0, None).unwrap();
        assert!(sol.q[3].abs() < 1e-6);
        let far = s * RigidTransform::translation(l1 + l2 + 0.01, 0.0, 0.0);
        assert!(matches!(arm_ik(&model, &far, 0.0, None), Err(Error::Unreachable(_))));
    }

    #[test]
    fn euler_round_trips() {
        let r = Rotation3::from_axis_angle(&Vec3::z_axis(), 0.3)
            * Rotation3::from_axis_angle(&Vec3::y_axis(), -0.7)
            * Rotation3::from_axis_angle(&Vec3::x_axis(), 2.0);
        for [a, b, c] in euler_zyx(r.matrix()) {
            let back = Rotation3::from_axis_angle(&Vec3::z_axis(), a)
                * Rotation3::from_axis_angle(&Vec3::y_axis(), b)
                * Rotation3::from_axis_angle(&Vec3::x_axis(), c);
            assert!((back.matrix() - r.matrix()).norm() < 1e-12);
        }
        for [a, b, c] in euler_xyz(r.matrix()) {
            let back = Rotation3::from_axis_angle(&Vec3::x_axis(), a)
                * Rotation3::from_axis_angle(&Vec3::y_axis(), b)
                * Rotation3::from_axis_angle(&Vec3::z_axis(), c);
            assert!((back.matrix() - r.matrix()).norm() < 1e-12);
        }
    }
}
