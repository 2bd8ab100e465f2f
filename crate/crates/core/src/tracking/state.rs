use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
use crate::geometry::{canonical, Quat, RigidTransform, Vec3};

/// Pose and twist of a rigid body in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub position: Vec3,
    pub orientation: Quat,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
}

impl BodyState {
    pub fn at_rest(frame: &RigidTransform) -> Self {
        Self {
            position: frame.translation.vector,
            orientation: canonical(frame.rotation),
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
        }
    }

    /// The 13 numbers p, o (w, x, y, z), v, w expressed in `palm`.
    fn push_local(&self, palm: &RigidTransform, out: &mut Vec<f64>) {
        let inv = palm.inverse();
        let p = inv.transform_point(&self.position.into()).coords;
        let o = canonical(inv.rotation * self.orientation);
        let v = inv.rotation * self.velocity;
        let w = inv.rotation * self.angular_velocity;
        out.extend_from_slice(p.as_slice());
        out.extend_from_slice(&[o.w, o.i, o.j, o.k]);
        out.extend_from_slice(v.as_slice());
        out.extend_from_slice(w.as_slice());
    }
}

/// Rates of the 7-DoF chopstick configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChopRate {
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
    pub phi_rate: f64,
}

/// One time sample of hand, chopsticks and object.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFrame {
    /// Full joint vector (arm then hand) and its rate.
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    /// Hand root (palm) in the world.
    pub palm: RigidTransform,
    pub chop: ChopstickConfig,
    pub chop_rate: ChopRate,
    /// Upper then lower stick.
    pub sticks: [BodyState; 2],
    pub object: Option<BodyState>,
    /// Per-finger fingertip-to-stick gaps (m).
    pub contact_gaps: Vec<f64>,
    /// Per-finger contact force magnitudes; zero without dynamics.
    pub f_hand: Vec<f64>,
    pub f_chop: [f64; 2],
}

impl SimFrame {
    /// A frame with zero rates and zero contact forces.
    pub fn at_rest(
        spec: &ChopstickSpec,
        q: Vec<f64>,
        palm: RigidTransform,
        chop: ChopstickConfig,
        object: Option<BodyState>,
        contact_gaps: Vec<f64>,
    ) -> Self {
        let n = q.len();
        let rate = ChopRate::default();
        Self {
            sticks: Self::sticks_from_config(spec, &chop, &rate),
            qdot: vec![0.0; n],
            q,
            palm,
            chop,
            chop_rate: rate,
            object,
            f_hand: vec![0.0; contact_gaps.len()],
            contact_gaps,
            f_chop: [0.0; 2],
        }
    }

    /// Stick states derived from the 7-DoF configuration and its rate.
    pub fn sticks_from_config(spec: &ChopstickSpec, chop: &ChopstickConfig, rate: &ChopRate) -> [BodyState; 2] {
        let lower = chop.lower_frame();
        let upper = chop.upper_frame(spec);
        let w = rate.angular_velocity;
        let origin = chop.position;
        let up_pos = upper.translation.vector;
        // upper stick also spins about the pivot's local x axis
        let pivot = lower.transform_point(&Vec3::new(0.0, 0.0, spec.pivot_to_tip).into()).coords;
        let hinge = lower.rotation * Vec3::x() * rate.phi_rate;
        let upper_w = w + hinge;
        let upper_v = rate.velocity + w.cross(&(up_pos - origin)) + hinge.cross(&(up_pos - pivot));
        [
            BodyState { position: up_pos, orientation: canonical(upper.rotation), velocity: upper_v, angular_velocity: upper_w },
            BodyState { position: origin, orientation: canonical(lower.rotation), velocity: rate.velocity, angular_velocity: w },
        ]
    }

    /// Same frame moved rigidly by `t` (joint angles unchanged).
    pub fn transported(&self, t: &RigidTransform) -> Self {
        let move_body = |b: &BodyState| BodyState {
            position: t.transform_point(&b.position.into()).coords,
            orientation: canonical(t.rotation * b.orientation),
            velocity: t.rotation * b.velocity,
            angular_velocity: t.rotation * b.angular_velocity,
        };
        let lower = t * self.chop.lower_frame();
        Self {
            palm: t * self.palm,
            chop: ChopstickConfig::from_frame(&lower, self.chop.phi),
            chop_rate: ChopRate {
                velocity: t.rotation * self.chop_rate.velocity,
                angular_velocity: t.rotation * self.chop_rate.angular_velocity,
                phi_rate: self.chop_rate.phi_rate,
            },
            sticks: [move_body(&self.sticks[0]), move_body(&self.sticks[1])],
            object: self.object.as_ref().map(move_body),
            ..self.clone()
        }
    }
}

/// Number of lookahead reference frames and their spacing in 10 ms samples.
pub const LOOKAHEAD_FRAMES: usize = 6;
pub const LOOKAHEAD_STRIDE: usize = 5;

/// Observation length for `dofs` joints and `fingers` fingers.
pub fn state_dimension(dofs: usize, fingers: usize) -> usize {
    let current = 2 * dofs + 26 + 13 + 6 + 2 * fingers + 2;
    current + LOOKAHEAD_FRAMES * (2 * dofs + 15 + 13)
}

/// Flat observation at reference index `index`: current hand, sticks and
/// object, object descriptor, gaps and forces, then six reference frames
/// 50 ms apart (the last reference frame repeats past the end). Cartesian
/// quantities are expressed in the palm frame of `sim`.
pub fn assemble_state(sim: &SimFrame, refs: &[SimFrame], index: usize, descriptor: Option<[f64; 6]>) -> Vec<f64> {
    let palm = &sim.palm;
    let inv = palm.inverse();
    let mut out = Vec::with_capacity(state_dimension(sim.q.len(), sim.contact_gaps.len()));
    out.extend_from_slice(&sim.q);
    out.extend_from_slice(&sim.qdot);
    for s in &sim.sticks {
        s.push_local(palm, &mut out);
    }
    match &sim.object {
        Some(o) => o.push_local(palm, &mut out),
        None => out.extend_from_slice(&[0.0; 13]),
    }
    out.extend_from_slice(&descriptor.unwrap_or([0.0; 6]));
    out.extend_from_slice(&sim.contact_gaps);
    out.extend_from_slice(&sim.f_hand);
    out.extend_from_slice(&sim.f_chop);
    for k in 1..=LOOKAHEAD_FRAMES {
        let r = match refs.len() {
            0 => sim,
            n => &refs[(index + k * LOOKAHEAD_STRIDE).min(n - 1)],
        };
        out.extend_from_slice(&r.q);
        out.extend_from_slice(&r.qdot);
        let lower = inv * r.chop.lower_frame();
        let o = canonical(lower.rotation);
        out.extend_from_slice(lower.translation.vector.as_slice());
        out.extend_from_slice(&[o.w, o.i, o.j, o.k, r.chop.phi]);
        out.extend_from_slice((inv.rotation * r.chop_rate.velocity).as_slice());
        out.extend_from_slice((inv.rotation * r.chop_rate.angular_velocity).as_slice());
        out.push(r.chop_rate.phi_rate);
        match &r.object {
            Some(o) => o.push_local(palm, &mut out),
            None => out.extend_from_slice(&[0.0; 13]),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{axis_angle, transform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_transform(rng: &mut ChaCha8Rng) -> RigidTransform {
        let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let p = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        transform(p, axis_angle(&(axis + Vec3::new(0.0, 0.0, 1e-3)), rng.random_range(-3.0..3.0)))
    }

    fn frame(rng: &mut ChaCha8Rng) -> SimFrame {
        let spec = ChopstickSpec::default();
        let palm = random_transform(rng);
        let chop = ChopstickConfig::from_frame(&random_transform(rng), 0.1);
        let obj = BodyState {
            velocity: Vec3::new(0.1, -0.2, 0.3),
            angular_velocity: Vec3::new(1.0, 0.0, -1.0),
            ..BodyState::at_rest(&random_transform(rng))
        };
        let q = (0..37).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut f = SimFrame::at_rest(&spec, q, palm, chop, Some(obj), vec![0.001; 5]);
        f.chop_rate = ChopRate { velocity: Vec3::new(0.2, 0.0, 0.1), angular_velocity: Vec3::new(0.0, 0.5, 0.0), phi_rate: 0.3 };
        f.sticks = SimFrame::sticks_from_config(&spec, &f.chop, &f.chop_rate);
        f
    }

    #[test]
    fn standard_hand_with_object_dimension() {
        // 74 + 26 + 13 + 6 + 10 + 2 = 131 current, 6 x (74 + 15 + 13) lookahead
        assert_eq!(state_dimension(37, 5), 743);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = frame(&mut rng);
        let v = assemble_state(&f, std::slice::from_ref(&f), 0, Some([0.0, 0.0, 1.0, 0.01, 0.01, 0.01]));
        assert_eq!(v.len(), 743);
    }

    #[test]
    fn palm_frame_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = frame(&mut rng);
        let refs: Vec<SimFrame> = (0..40).map(|_| frame(&mut rng)).collect();
        let base = assemble_state(&f, &refs, 3, None);
        for _ in 0..20 {
            let t = random_transform(&mut rng);
            let moved: Vec<SimFrame> = refs.iter().map(|r| r.transported(&t)).collect();
            let v = assemble_state(&f.transported(&t), &moved, 3, None);
            for (a, b) in base.iter().zip(&v) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn lookahead_pads_with_final_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let refs: Vec<SimFrame> = (0..10).map(|_| frame(&mut rng)).collect();
        let v = assemble_state(&refs[9], &refs, 9, None);
        let current = 2 * 37 + 26 + 13 + 6 + 10 + 2;
        let block = 2 * 37 + 15 + 13;
        let first = &v[current..current + block];
        for k in 1..6 {
            assert_eq!(first, &v[current + k * block..current + (k + 1) * block]);
        }
        assert_eq!(&first[..37], refs[9].q.as_slice());
    }

    #[test]
    fn upper_stick_rate_matches_finite_difference() {
        let spec = ChopstickSpec::default();
        let chop = ChopstickConfig::new(Vec3::new(0.1, 0.2, 0.3), axis_angle(&Vec3::new(1.0, 2.0, 0.5), 0.7), 0.2);
        let rate = ChopRate { velocity: Vec3::zeros(), angular_velocity: Vec3::zeros(), phi_rate: 0.5 };
        let s = SimFrame::sticks_from_config(&spec, &chop, &rate);
        let h = 1e-6;
        let next = ChopstickConfig { phi: chop.phi + h * 0.5, ..chop };
        let fd = (next.upper_frame(&spec).translation.vector - chop.upper_frame(&spec).translation.vector) / h;
        assert!((fd - s[0].velocity).norm() < 1e-6);
    }
}
