//! GP-UCB search over contact positions with a pluggable pose evaluator.
mod acquisition;
pub mod benchmark;
mod evaluator;
mod gp;

pub use acquisition::{maximize_acquisition, ucb_acquisition, ucb_beta, AcquisitionSearch};
pub use evaluator::{evaluate_grip_kinematic, t_pose, KinematicEvaluator, Maneuver, ManeuverSpec, PoseEvaluator};
pub use gp::{GaussianProcess, Kernel};

use rand::Rng;

use crate::error::{Error, Result};
use crate::grip::{solve_grip_ik, GripPose, IkOptions};
use crate::hand::HandModel;
use crate::styles::GrippingStyle;

#[derive(Debug, Clone)]
pub struct BoOptions {
    pub iterations: usize,
    pub kernel: Kernel,
    pub search: AcquisitionSearch,
}

impl Default for BoOptions {
    fn default() -> Self {
        Self { iterations: 10, kernel: Kernel::default(), search: AcquisitionSearch::default() }
    }
}

/// Every evaluated input and value, plus the running best.
#[derive(Debug, Clone, PartialEq)]
pub struct BoTrace {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub best_index: usize,
    /// Best value seen after each evaluation.
    pub best_so_far: Vec<f64>,
}

impl BoTrace {
    pub fn best(&self) -> (&[f64], f64) {
        (&self.xs[self.best_index], self.ys[self.best_index])
    }
}

/// Maximizes `f` over `[0, 1]^dim` with GP-UCB. The first evaluation is the
/// centre of the box.
pub fn maximize<F, R>(mut f: F, dim: usize, opts: &BoOptions, rng: &mut R) -> Result<BoTrace>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng,
{
    if opts.iterations == 0 {
        return Err(Error::Invalid("need at least one evaluation".into()));
    }
    let mut gp = GaussianProcess::new(opts.kernel.clone());
    let mut trace = BoTrace { xs: Vec::new(), ys: Vec::new(), best_index: 0, best_so_far: Vec::new() };
    for t in 1..=opts.iterations {
        let x = if t == 1 {
            vec![0.5; dim]
        } else {
            maximize_acquisition(&gp, ucb_beta(t), dim, &opts.search, rng).0
        };
        let y = f(&x);
        log::debug!("bo iteration {t}: x = {x:?}, y = {y}");
        gp.add(x.clone(), y)?;
        if trace.ys.is_empty() || y > trace.ys[trace.best_index] {
            trace.best_index = trace.ys.len();
        }
        trace.xs.push(x);
        trace.ys.push(y);
        trace.best_so_far.push(trace.ys[trace.best_index]);
    }
    Ok(trace)
}

/// One evaluated contact proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct GripTrial {
    pub x: Vec<f64>,
    pub score: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct GripSearch {
    pub pose: GripPose,
    pub score: f64,
    pub trials: Vec<GripTrial>,
}

/// Searches contact positions for `style`, solving grip IK for each proposal
/// and scoring feasible poses with `evaluator`. Infeasible proposals score 0.
pub fn optimize_grip<R: Rng>(
    model: &HandModel,
    style: &GrippingStyle,
    evaluator: &dyn PoseEvaluator,
    ik: &IkOptions,
    opts: &BoOptions,
    rng: &mut R,
) -> Result<GripSearch> {
    if let Err(why) = style.validate() {
        return Err(Error::Invalid(format!("style {style} rejected: {why}")));
    }
    let dim = style.contacting().len();
    let mut best: Option<(GripPose, f64)> = None;
    let mut trials = Vec::new();
    let mut failure = None;
    let trace = maximize(
        |x| {
            let outcome = solve_grip_ik(model, style, x, ik).and_then(|p| evaluator.evaluate(model, &p).map(|s| (p, s)));
            match outcome {
                Ok((pose, score)) => {
                    trials.push(GripTrial { x: x.to_vec(), score, feasible: true });
                    if best.as_ref().is_none_or(|(_, b)| score > *b) {
                        best = Some((pose, score));
                    }
                    score
                }
                Err(e @ (Error::InfeasibleContact { .. } | Error::Domain(_))) => {
                    log::debug!("proposal {x:?} infeasible: {e}");
                    trials.push(GripTrial { x: x.to_vec(), score: 0.0, feasible: false });
                    0.0
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    trials.push(GripTrial { x: x.to_vec(), score: 0.0, feasible: false });
                    0.0
                }
            }
        },
        dim,
        opts,
        rng,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    debug_assert_eq!(trace.ys.len(), trials.len());
    match best {
        Some((pose, score)) => Ok(GripSearch { pose, score, trials }),
        None => Err(Error::NoFeasibleGrip { evaluated: trials.len() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quick() -> BoOptions {
        BoOptions { iterations: 6, kernel: Kernel { signal_variance: 1.0, ..Kernel::default() }, ..BoOptions::default() }
    }

    #[test]
    fn trace_is_monotone_and_reproducible() {
        let run = |seed| maximize(benchmark::branin_unit, 2, &quick(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let a = run(3);
        assert!(a.best_so_far.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(a, run(3));
        assert_eq!(a.xs[0], vec![0.5, 0.5]);
        assert_eq!(a.best().1, a.ys.iter().copied().fold(f64::MIN, f64::max));
    }

    #[test]
    fn single_iteration_returns_the_evaluated_pose() {
        let model = preset("standard").unwrap();
        let style = GrippingStyle::standard();
        let ev = KinematicEvaluator::default();
        let opts = BoOptions { iterations: 1, ..BoOptions::default() };
        let out = optimize_grip(&model, &style, &ev, &IkOptions::default(), &opts, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.trials.len(), 1);
        assert_eq!(out.pose.x, vec![0.5; 4]);
        assert_eq!(out.score, out.trials[0].score);
    }

    #[test]
    fn infeasible_everywhere_is_an_error() {
        struct Never;
        impl PoseEvaluator for Never {
            fn evaluate(&self, _: &HandModel, _: &GripPose) -> Result<f64> {
                Ok(0.0)
            }
        }
        let model = preset("standard").unwrap();
        // demanding an impossible residual makes every proposal infeasible
        let ik = IkOptions { residual_tol: 0.0, max_iters: 5, ..IkOptions::default() };
        let opts = BoOptions { iterations: 2, ..BoOptions::default() };
        let err = optimize_grip(&model, &GrippingStyle::standard(), &Never, &ik, &opts, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::NoFeasibleGrip { evaluated: 2 })));
    }
}
