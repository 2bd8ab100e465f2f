use rand::Rng;

use super::gp::GaussianProcess;

/// Upper confidence bound `mu + sqrt(beta) sigma`.
pub fn ucb_acquisition(gp: &GaussianProcess, x: &[f64], beta: f64) -> f64 {
    let (mu, var) = gp.predict(x);
    mu + beta.max(0.0).sqrt() * var.sqrt()
}

/// Exploration weight at iteration `t` (1-based): `2 ln(t^2 pi^2 / 0.6)`.
pub fn ucb_beta(t: usize) -> f64 {
    let t = t.max(1) as f64;
    2.0 * (t * t * std::f64::consts::PI.powi(2) / 0.6).ln()
}

#[derive(Debug, Clone, Copy)]
pub struct AcquisitionSearch {
    pub samples: usize,
    pub starts: usize,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for AcquisitionSearch {
    fn default() -> Self {
        Self { samples: 512, starts: 6, initial_step: 0.05, min_step: 1e-4 }
    }
}

/// Bounded compass search maximizing `f` on the unit box from `x`.
fn compass<F: Fn(&[f64]) -> f64>(f: &F, mut x: Vec<f64>, mut fx: f64, opts: &AcquisitionSearch) -> (Vec<f64>, f64) {
    let mut step = opts.initial_step;
    while step >= opts.min_step {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = (y[i] + dir * step).clamp(0.0, 1.0);
                let fy = f(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Maximizes the acquisition over `[0, 1]^dim`: random sampling, then
/// compass refinement from the best few samples and observed points.
pub fn maximize_acquisition<R: Rng>(
    gp: &GaussianProcess,
    beta: f64,
    dim: usize,
    opts: &AcquisitionSearch,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let f = |x: &[f64]| ucb_acquisition(gp, x, beta);
    let mut pool: Vec<(Vec<f64>, f64)> = (0..opts.samples)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let v = f(&x);
            (x, v)
        })
        .collect();
    pool.extend(gp.observations().0.iter().map(|x| (x.clone(), f(x))));
    pool.sort_by(|a, b| b.1.total_cmp(&a.1));
    pool.truncate(opts.starts.max(1));
    pool.into_iter()
        .map(|(x, v)| compass(&f, x, v, opts))
        .fold((vec![0.5; dim], f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

#[cfg(test)]
mod tests {
    use super::super::gp::Kernel;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn beta_schedule_grows() {
        assert!((ucb_beta(1) - 2.0 * (std::f64::consts::PI.powi(2) / 0.6).ln()).abs() < 1e-12);
        assert!(ucb_beta(5) > ucb_beta(4));
    }

    #[test]
    fn observed_point_and_prior_limit() {
        let mut gp = GaussianProcess::new(Kernel::default());
        gp.add(vec![0.3], 0.4).unwrap();
        gp.add(vec![0.7], 0.2).unwrap();
        assert!((ucb_acquisition(&gp, &[0.3], 4.0) - 0.4).abs() < 1e-2);
        let far = ucb_acquisition(&gp, &[100.0], 4.0);
        assert!((far - (0.3 + 2.0 * 0.1f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn zero_beta_exploits() {
        let mut gp = GaussianProcess::new(Kernel::default());
        gp.add(vec![0.2], 0.1).unwrap();
        gp.add(vec![0.6], 0.9).unwrap();
        gp.add(vec![0.9], 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (x, v) = maximize_acquisition(&gp, 0.0, 1, &AcquisitionSearch::default(), &mut rng);
        let grid_best = (0..=1000).map(|i| gp.predict(&[i as f64 / 1000.0]).0).fold(f64::MIN, f64::max);
        assert!(v >= grid_best - 1e-6, "{x:?} {v} {grid_best}");
    }
}
