//! Box-constrained L-BFGS: two-loop recursion on the free variables,
//! projection onto the bounds, Armijo backtracking.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iters: usize,
    /// Stop when the projected gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop when the objective changes less than this (relative) over an iteration.
    pub f_tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 10, max_iters: 500, grad_tol: 1e-8, f_tol: 0.0, armijo: 1e-4, max_backtracks: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// True when the gradient or objective tolerance was met.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Gradient with components that push against an active bound zeroed.
fn projected_gradient(x: &[f64], g: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(bounds)
        .map(|((&xi, &gi), &(lo, hi))| {
            if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

/// Minimizes `f` over the box `bounds` starting from `x0`. `f` returns the
/// value and writes the gradient.
pub fn minimize<F>(mut f: F, x0: &[f64], bounds: &[(f64, f64)], opts: &LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, bounds);
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut pg = projected_gradient(&x, &g, bounds);
    let mut gnorm = dot(&pg, &pg).sqrt();
    let mut iters = 0;
    let mut converged = gnorm < opts.grad_tol;
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];

    while !converged && iters < opts.max_iters {
        iters += 1;
        // two-loop recursion
        let mut d = pg.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        for (di, pgi) in d.iter_mut().zip(&pg) {
            *di = if *pgi == 0.0 { 0.0 } else { -*di };
        }
        if dot(&d, &pg) >= 0.0 {
            hist.clear();
            d = pg.iter().map(|v| -v).collect();
        }
        let mut step = if hist.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

        let mut accepted = false;
        for _ in 0..opts.max_backtracks {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
            }
            project(&mut xn, bounds);
            let dx: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &dx);
            let fn_ = f(&xn, &mut gn);
            if fn_.is_finite() && fn_ <= fx + opts.armijo * decrease && decrease < 0.0 {
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&dx, &y);
                if sy > 1e-16 * dot(&y, &y).max(1e-300) && sy > 0.0 {
                    if hist.len() == opts.memory {
                        hist.pop_front();
                    }
                    hist.push_back((dx, y, 1.0 / sy));
                }
                let df = fx - fn_;
                x.copy_from_slice(&xn);
                g.copy_from_slice(&gn);
                fx = fn_;
                accepted = true;
                if opts.f_tol > 0.0 && df <= opts.f_tol * fx.abs().max(1e-300) {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        pg = projected_gradient(&x, &g, bounds);
        gnorm = dot(&pg, &pg).sqrt();
        if gnorm < opts.grad_tol {
            converged = true;
        }
        if !accepted {
            if hist.is_empty() {
                // steepest descent made no progress: numerically stationary
                break;
            }
            hist.clear();
        }
    }
    LbfgsResult { x, f: fx, grad_norm: gnorm, iterations: iters, converged }
}
