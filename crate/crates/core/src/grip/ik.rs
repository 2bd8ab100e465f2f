use crate::chopsticks::{contact_point, ChopstickSpec, Stick};
use crate::error::{Error, Result};
use crate::geometry::{capsule_distance, clog_smooth, point_segment_distance, Capsule, RigidTransform, Vec3};
use crate::hand::{FkResult, HandModel, ARM_DOFS};
use crate::lbfgs::{minimize, LbfgsOptions};
use crate::styles::GrippingStyle;

use super::pose::GripPose;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkOptions {
    /// Barrier threshold on penetration (m).
    pub z0: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Largest accepted fingertip-to-contact distance (m).
    pub residual_tol: f64,
    /// Largest accepted fingertip-stick penetration (m).
    pub penetration_tol: f64,
    /// Opening angle of the pair while the pose is solved.
    pub grip_phi: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self { z0: 0.001, max_iters: 500, grad_tol: 1e-8, residual_tol: 1e-3, penetration_tol: 1e-3, grip_phi: 0.1 }
    }
}

/// Contact targets and stick geometry in the palm frame for one style.
#[derive(Debug, Clone)]
pub struct GripProblem<'a> {
    pub model: &'a HandModel,
    pub spec: ChopstickSpec,
    pub style: GrippingStyle,
    pub x: Vec<f64>,
    /// Contacting finger indices, thumb first.
    pub fingers: Vec<usize>,
    pub sticks: Vec<Stick>,
    pub targets: Vec<Vec3>,
    /// Upper and lower stick capsules.
    pub capsules: [Capsule; 2],
    pub z0: f64,
    /// Optional pull `w * |q - q_ref|^2` that keeps repeated solves from
    /// drifting through the redundant joints.
    pub prior: Option<(Vec<f64>, f64)>,
}

/// Surface contact points for each contacting finger, in the frame of
/// `lower_frame` (usually the palm).
pub fn contact_points(
    spec: &ChopstickSpec,
    lower_frame: &RigidTransform,
    phi: f64,
    style: &GrippingStyle,
    x: &[f64],
    palm_center: &Vec3,
) -> Result<Vec<Vec3>> {
    let sticks: Vec<Stick> = style.0.iter().filter_map(|&c| Stick::from_style(c)).collect();
    if sticks.len() != x.len() {
        return Err(Error::Dimension { expected: sticks.len(), got: x.len() });
    }
    let upper = lower_frame * spec.upper_relative(phi);
    Ok(sticks
        .iter()
        .zip(x)
        .map(|(s, &xi)| {
            let frame = if *s == Stick::Upper { &upper } else { lower_frame };
            contact_point(spec, frame, xi, palm_center)
        })
        .collect())
}

impl<'a> GripProblem<'a> {
    pub fn new(
        model: &'a HandModel,
        style: &GrippingStyle,
        x: &[f64],
        spec: ChopstickSpec,
        opts: &IkOptions,
    ) -> Result<Self> {
        if style.finger_count() != model.finger_count() {
            return Err(Error::Invalid(format!(
                "style {style} has {} entries but the hand has {} fingers",
                style.finger_count(),
                model.finger_count()
            )));
        }
        if let Err(why) = style.validate() {
            return Err(Error::Invalid(format!("style {style} rejected: {why}")));
        }
        let fingers = style.contacting();
        if x.len() != fingers.len() {
            return Err(Error::Dimension { expected: fingers.len(), got: x.len() });
        }
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!("contact fraction {bad} outside [0, 1]")));
        }
        let sticks = fingers.iter().map(|&f| Stick::from_style(style.0[f]).expect("contacting")).collect();
        let mut p = Self {
            model,
            spec,
            style: style.clone(),
            x: x.to_vec(),
            fingers,
            sticks,
            targets: Vec::new(),
            capsules: [Capsule::new(0.0, spec.radius, RigidTransform::identity()); 2],
            z0: opts.z0,
            prior: None,
        };
        p.place_sticks(&model.grip.chopsticks, opts.grip_phi);
        Ok(p)
    }

    /// Moves the pair (lower-stick frame in palm coordinates) and recomputes
    /// the contact targets.
    pub fn place_sticks(&mut self, lower: &RigidTransform, phi: f64) {
        let upper = lower * self.spec.upper_relative(phi);
        self.capsules = [self.spec.capsule(&upper), self.spec.capsule(lower)];
        let center = self.model.grip.palm_center;
        self.targets = self
            .sticks
            .iter()
            .zip(&self.x)
            .map(|(s, &xi)| contact_point(&self.spec, if *s == Stick::Upper { &upper } else { lower }, xi, &center))
            .collect();
    }

    fn stick_capsule(&self, s: Stick) -> &Capsule {
        match s {
            Stick::Upper => &self.capsules[0],
            Stick::Lower => &self.capsules[1],
        }
    }

    fn fk(&self, q: &[f64]) -> Result<FkResult> {
        self.model.forward_kinematics_from_palm(q, &RigidTransform::identity())
    }

    /// Sum of squared contact residuals plus penetration barriers. Writes the
    /// gradient over the full joint vector when `grad` is given.
    pub fn objective(&self, q: &[f64], mut grad: Option<&mut [f64]>) -> Result<f64> {
        let fk = self.fk(q)?;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut value = 0.0;
        if let Some((q_ref, w)) = &self.prior {
            for (i, (qi, ri)) in q.iter().zip(q_ref).enumerate() {
                value += w * (qi - ri).powi(2);
                if let Some(g) = grad.as_deref_mut() {
                    g[i] += 2.0 * w * (qi - ri);
                }
            }
        }
        for (k, &finger) in self.fingers.iter().enumerate() {
            let tip_joint = self.model.fingers[finger].tip;
            let cap = self.model.fingertip_capsule(&fk, finger);
            let (a, b) = cap.segment();
            let target = self.targets[k];

            // contact residual: distance from target to the fingertip surface
            let (dseg, _, c) = point_segment_distance(&target, &a, &b);
            let res = dseg - cap.radius;
            value += res * res;
            if let Some(g) = grad.as_deref_mut() {
                if dseg > 1e-12 {
                    let n = (c - target) / dseg;
                    for &d in self.model.chain_dofs(tip_joint) {
                        g[d] += 2.0 * res * n.dot(&fk.point_derivative(d, &c));
                    }
                }
            }

            // barrier on penetration into the assigned stick
            let contact = capsule_distance(&cap, self.stick_capsule(self.sticks[k]));
            let pen = -contact.distance;
            if pen > 0.0 {
                let (v, slope) = clog_smooth(self.z0 - pen, self.z0);
                value += v;
                if let Some(g) = grad.as_deref_mut() {
                    let axis_pt = contact.point_a + contact.normal * cap.radius;
                    for &d in self.model.chain_dofs(tip_joint) {
                        // d(z0 - pen)/dq = d(distance)/dq
                        g[d] += slope * contact.normal.dot(&fk.point_derivative(d, &axis_pt));
                    }
                }
            }
        }
        Ok(value)
    }

    /// Per-finger distance to its contact target and the worst penetration.
    pub fn report(&self, q: &[f64]) -> Result<(Vec<f64>, f64)> {
        let fk = self.fk(q)?;
        let mut residuals = Vec::with_capacity(self.fingers.len());
        let mut worst: f64 = 0.0;
        for (k, &finger) in self.fingers.iter().enumerate() {
            let cap = self.model.fingertip_capsule(&fk, finger);
            let (a, b) = cap.segment();
            let (dseg, _, _) = point_segment_distance(&self.targets[k], &a, &b);
            residuals.push((dseg - cap.radius).abs());
            let contact = capsule_distance(&cap, self.stick_capsule(self.sticks[k]));
            worst = worst.max(-contact.distance);
        }
        Ok((residuals, worst))
    }

    /// Fingertip-to-assigned-stick surface gaps, clamped at zero.
    pub fn stick_gaps(&self, q: &[f64]) -> Result<Vec<f64>> {
        let fk = self.fk(q)?;
        Ok(self
            .fingers
            .iter()
            .zip(&self.sticks)
            .map(|(&f, &s)| capsule_distance(&self.model.fingertip_capsule(&fk, f), self.stick_capsule(s)).distance.max(0.0))
            .collect())
    }

    /// Bounds with the arm DoFs pinned to their values in `q0`.
    fn bounds(&self, q0: &[f64]) -> Vec<(f64, f64)> {
        let mut b = self.model.limits();
        for (i, bi) in b.iter_mut().enumerate().take(ARM_DOFS) {
            *bi = (q0[i], q0[i]);
        }
        b
    }

    /// Runs projected L-BFGS from `q0`; returns the pose vector, residuals,
    /// worst penetration and iteration count without applying tolerances.
    pub fn minimize_from(&self, q0: &[f64], opts: &IkOptions) -> Result<(Vec<f64>, Vec<f64>, f64, usize)> {
        if q0.len() != self.model.dof_count() {
            return Err(Error::Dimension { expected: self.model.dof_count(), got: q0.len() });
        }
        let lopts = LbfgsOptions { max_iters: opts.max_iters, grad_tol: opts.grad_tol, ..Default::default() };
        let r = minimize(
            |q, g| self.objective(q, Some(g)).unwrap_or(f64::INFINITY),
            q0,
            &self.bounds(q0),
            &lopts,
        );
        let (res, pen) = self.report(&r.x)?;
        Ok((r.x, res, pen, r.iterations))
    }
}

/// Value and gradient of the grip objective at `q`.
pub fn ik_objective(
    model: &HandModel,
    style: &GrippingStyle,
    x: &[f64],
    q: &[f64],
    opts: &IkOptions,
) -> Result<(f64, Vec<f64>)> {
    let p = GripProblem::new(model, style, x, ChopstickSpec::default(), opts)?;
    let mut g = vec![0.0; model.dof_count()];
    let v = p.objective(q, Some(&mut g))?;
    Ok((v, g))
}

/// Solves for a gripping pose from the T-pose.
pub fn solve_grip_ik(model: &HandModel, style: &GrippingStyle, x: &[f64], opts: &IkOptions) -> Result<GripPose> {
    solve_grip_ik_from(model, style, x, &model.rest_pose(), opts)
}

pub fn solve_grip_ik_from(
    model: &HandModel,
    style: &GrippingStyle,
    x: &[f64],
    q0: &[f64],
    opts: &IkOptions,
) -> Result<GripPose> {
    let spec = ChopstickSpec::default();
    let p = GripProblem::new(model, style, x, spec, opts)?;
    let (q, residuals, penetration, iterations) = p.minimize_from(q0, opts)?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst >= opts.residual_tol || penetration >= opts.penetration_tol {
        return Err(Error::InfeasibleContact { iterations, residuals, penetration });
    }
    let to_stick = model.grip.chopsticks.inverse();
    let anchors = p.targets.iter().map(|t| to_stick.transform_point(&(*t).into()).coords).collect();
    Ok(GripPose {
        hand: model.name.clone(),
        q,
        style: style.clone(),
        x: x.to_vec(),
        anchors,
        holding_offset: 0.0,
        grip_phi: opts.grip_phi,
        residuals,
        penetration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::preset;
    use crate::styles::enumerate_valid_styles;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn objective_zero_when_contacts_met() {
        let m = preset("standard").unwrap();
        let style = GrippingStyle::standard();
        let pose = solve_grip_ik(&m, &style, &[0.5; 4], &IkOptions::default()).unwrap();
        let (v, _) = ik_objective(&m, &style, &[0.5; 4], &pose.q, &IkOptions::default()).unwrap();
        assert!(v < 1e-6, "{v}");
        assert!(pose.residuals.iter().all(|r| *r < 1e-3));
        assert!(pose.penetration < 1e-3);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let m = preset("standard").unwrap();
        let style = GrippingStyle::standard();
        let opts = IkOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lim = m.limits();
        for _ in 0..20 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.2..0.8)).collect();
            let q: Vec<f64> = lim.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
            let (_, g) = ik_objective(&m, &style, &x, &q, &opts).unwrap();
            let h = 1e-6;
            let fd: Vec<f64> = (0..q.len())
                .map(|i| {
                    let mut a = q.clone();
                    let mut b = q.clone();
                    a[i] += h;
                    b[i] -= h;
                    (ik_objective(&m, &style, &x, &a, &opts).unwrap().0 - ik_objective(&m, &style, &x, &b, &opts).unwrap().0)
                        / (2.0 * h)
                })
                .collect();
            let err: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-8);
            assert!(err / scale < 1e-4, "relative error {}", err / scale);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = preset("standard").unwrap();
        let o = IkOptions::default();
        assert!(solve_grip_ik(&m, &GrippingStyle(vec![0; 5]), &[], &o).is_err());
        assert!(solve_grip_ik(&m, &GrippingStyle::standard(), &[0.5; 3], &o).is_err());
        assert!(solve_grip_ik(&m, &GrippingStyle::standard(), &[1.5; 4], &o).is_err());
        assert!(solve_grip_ik(&m, &GrippingStyle(vec![1, 1, 2]), &[0.5; 3], &o).is_err());
    }

    #[test]
    fn deterministic_solve() {
        let m = preset("standard").unwrap();
        let s = &enumerate_valid_styles(5).unwrap()[3];
        let n = s.contacting().len();
        let a = solve_grip_ik_from(&m, s, &vec![0.5; n], &m.rest_pose(), &IkOptions::default());
        let b = solve_grip_ik_from(&m, s, &vec![0.5; n], &m.rest_pose(), &IkOptions::default());
        match (a, b) {
            (Ok(a), Ok(b)) => assert_eq!(a.q, b.q),
            (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
            _ => panic!("nondeterministic outcome"),
        }
    }
}
