use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Squared-exponential kernel with one lengthscale per input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    /// A single entry is broadcast to every dimension.
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl Default for Kernel {
    fn default() -> Self {
        Self { lengthscales: vec![0.25], signal_variance: 0.1, noise_variance: 1e-6 }
    }
}

impl Kernel {
    fn lengthscale(&self, i: usize) -> f64 {
        if self.lengthscales.len() == 1 {
            self.lengthscales[0]
        } else {
            self.lengthscales[i]
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).enumerate().map(|(i, (x, y))| ((x - y) / self.lengthscale(i)).powi(2)).sum();
        self.signal_variance * (-0.5 * r2).exp()
    }
}

/// Exact GP regression with a constant prior mean equal to the mean of the
/// observations.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    pub kernel: Kernel,
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    mean: f64,
    chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    alpha: DVector<f64>,
}

impl GaussianProcess {
    pub fn new(kernel: Kernel) -> Self {
        Self { kernel, xs: Vec::new(), ys: Vec::new(), mean: 0.0, chol: None, alpha: DVector::zeros(0) }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn observations(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn prior_mean(&self) -> f64 {
        self.mean
    }

    /// Adds one observation and refits.
    pub fn add(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if let Some(first) = self.xs.first() {
            if first.len() != x.len() {
                return Err(Error::Dimension { expected: first.len(), got: x.len() });
            }
        }
        if !y.is_finite() {
            return Err(Error::Invalid(format!("observation {y} is not finite")));
        }
        self.xs.push(x);
        self.ys.push(y);
        self.refit()
    }

    fn refit(&mut self) -> Result<()> {
        let n = self.xs.len();
        self.mean = self.ys.iter().sum::<f64>() / n as f64;
        let base = DMatrix::from_fn(n, n, |i, j| {
            self.kernel.eval(&self.xs[i], &self.xs[j]) + if i == j { self.kernel.noise_variance } else { 0.0 }
        });
        let mut jitter = 0.0;
        for _ in 0..8 {
            let mut k = base.clone();
            for i in 0..n {
                k[(i, i)] += jitter;
            }
            if let Some(c) = k.cholesky() {
                let centered = DVector::from_iterator(n, self.ys.iter().map(|y| y - self.mean));
                self.alpha = c.solve(&centered);
                self.chol = Some(c);
                return Ok(());
            }
            jitter = if jitter == 0.0 { 1e-10 * self.kernel.signal_variance } else { jitter * 10.0 };
        }
        Err(Error::Domain("GP covariance is not positive definite".into()))
    }

    /// Posterior mean and variance at `x`.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let prior = self.kernel.signal_variance;
        let Some(chol) = &self.chol else {
            return (self.mean, prior);
        };
        let k = DVector::from_iterator(self.xs.len(), self.xs.iter().map(|xi| self.kernel.eval(xi, x)));
        let mu = self.mean + k.dot(&self.alpha);
        let v = chol.l().solve_lower_triangular(&k).expect("triangular factor is invertible");
        let var = (prior - v.dot(&v)).max(0.0);
        (mu, var)
    }
}
