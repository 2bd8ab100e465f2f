use super::state::SimFrame;
use crate::error::{Error, Result};
use crate::geometry::quat_angle;
use crate::styles::GrippingStyle;

/// Reward terms; each term is nonpositive and `r = exp(sum)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardBreakdown {
    pub r_hand: f64,
    pub r_chop: f64,
    pub r_obj: f64,
    pub r_contact: f64,
    pub r: f64,
}

const W_POSE: f64 = 10.0;
const W_POS: f64 = 40.0;
const W_ANGLE: f64 = 10.0;
const W_CONTACT: f64 = 10.0;

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Tracking reward of `sim` against `reference`. The object term is dropped
/// when the reference carries no object.
pub fn reward(sim: &SimFrame, reference: &SimFrame, style: &GrippingStyle) -> RewardBreakdown {
    let r_hand = -W_POSE * l2(&sim.q, &reference.q);
    let r_chop = sim
        .sticks
        .iter()
        .zip(&reference.sticks)
        .map(|(s, r)| -W_POS * (s.position - r.position).norm() - W_ANGLE * quat_angle(&s.orientation, &r.orientation))
        .sum::<f64>();
    let r_obj = match (&sim.object, &reference.object) {
        (Some(s), Some(r)) => -W_POS * (s.position - r.position).norm() - W_ANGLE * quat_angle(&s.orientation, &r.orientation),
        _ => 0.0,
    };
    let r_contact = -W_CONTACT
        * style
            .contacting()
            .iter()
            .map(|&i| sim.contact_gaps.get(i).copied().unwrap_or(0.0).max(0.0))
            .sum::<f64>();
    RewardBreakdown { r_hand, r_chop, r_obj, r_contact, r: (r_hand + r_chop + r_obj + r_contact).exp() }
}

/// Mean reward and mean terms over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub average: f64,
    pub mean_terms: RewardBreakdown,
    pub per_frame: Vec<f64>,
}

pub fn score_frames(sim: &[SimFrame], reference: &[SimFrame], style: &GrippingStyle) -> Result<ScoreReport> {
    if sim.len() != reference.len() {
        return Err(Error::Dimension { expected: reference.len(), got: sim.len() });
    }
    if sim.is_empty() {
        return Err(Error::Invalid("cannot score an empty run".into()));
    }
    let n = sim.len() as f64;
    let mut mean = RewardBreakdown::default();
    let mut per_frame = Vec::with_capacity(sim.len());
    for (s, r) in sim.iter().zip(reference) {
        let b = reward(s, r, style);
        mean.r_hand += b.r_hand / n;
        mean.r_chop += b.r_chop / n;
        mean.r_obj += b.r_obj / n;
        mean.r_contact += b.r_contact / n;
        per_frame.push(b.r);
    }
    let average = per_frame.iter().sum::<f64>() / n;
    mean.r = average;
    Ok(ScoreReport { average, mean_terms: mean, per_frame })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chopsticks::{ChopstickConfig, ChopstickSpec};
    use crate::geometry::{RigidTransform, Vec3};
    use crate::tracking::BodyState;

    fn perfect() -> SimFrame {
        let spec = ChopstickSpec::default();
        let chop = ChopstickConfig::from_frame(&RigidTransform::translation(0.1, 0.0, 0.2), 0.05);
        let obj = BodyState::at_rest(&RigidTransform::translation(0.1, 0.0, 0.0));
        SimFrame::at_rest(&spec, vec![0.2; 37], RigidTransform::identity(), chop, Some(obj), vec![0.0; 5])
    }

    #[test]
    fn perfect_tracking_is_one() {
        let f = perfect();
        let b = reward(&f, &f, &GrippingStyle::standard());
        assert_eq!(b.r, 1.0);
        let run = vec![f.clone(); 25];
        assert_eq!(score_frames(&run, &run, &GrippingStyle::standard()).unwrap().average, 1.0);
    }

    #[test]
    fn single_error_spot_values() {
        let r = perfect();
        let mut s = r.clone();
        s.q[10] += 0.1;
        assert!((reward(&s, &r, &GrippingStyle::standard()).r - (-1.0f64).exp()).abs() < 1e-12);
        let mut s = r.clone();
        s.object.as_mut().unwrap().position.z += 0.01;
        assert!((reward(&s, &r, &GrippingStyle::standard()).r - (-0.4f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn object_term_dropped_without_reference_object() {
        let r = SimFrame { object: None, ..perfect() };
        let mut s = perfect();
        s.object.as_mut().unwrap().position.x += 1.0;
        assert_eq!(reward(&s, &r, &GrippingStyle::standard()).r, 1.0);
    }

    #[test]
    fn only_contacting_fingers_count() {
        let r = perfect();
        let mut s = r.clone();
        s.contact_gaps = vec![0.0, 0.0, 0.0, 0.0, 0.5];
        assert_eq!(reward(&s, &r, &GrippingStyle::standard()).r, 1.0);
        s.contact_gaps = vec![0.01, 0.0, 0.0, 0.0, 0.0];
        assert!((reward(&s, &r, &GrippingStyle::standard()).r - (-0.1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn one_bad_frame_mean() {
        let r = perfect();
        let mut bad = r.clone();
        bad.q[0] += 0.1;
        let n = 8;
        let mut sim = vec![r.clone(); n];
        sim[3] = bad;
        let score = score_frames(&sim, &vec![r; n], &GrippingStyle::standard()).unwrap();
        let rho = (-1.0f64).exp();
        assert!((score.average - (n as f64 - 1.0 + rho) / n as f64).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_and_empty() {
        let r = perfect();
        assert!(score_frames(std::slice::from_ref(&r), &[r.clone(), r.clone()], &GrippingStyle::standard()).is_err());
        assert!(score_frames(&[], &[], &GrippingStyle::standard()).is_err());
    }

    #[test]
    fn stick_error_costs() {
        let r = perfect();
        let mut s = r.clone();
        for b in s.sticks.iter_mut() {
            b.position += Vec3::new(0.0, 0.005, 0.0);
        }
        assert!((reward(&s, &r, &GrippingStyle::standard()).r - (-0.4f64).exp()).abs() < 1e-12);
    }
}
