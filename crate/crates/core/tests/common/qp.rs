//! Dense solver for the soft-margin SVM dual
//!
//!   max  Σα − ½ αᵀQα   s.t. 0 ≤ α ≤ C, yᵀα = 0,   Q_ij = y_i y_j K_ij
//!
//! by accelerated projected gradient (FISTA with adaptive restart) on the
//! full Gram matrix. Convergence is certified by the primal-dual gap, with
//! the primal bias found by an exact search over the hinge breakpoints.

use super::Dense;

pub struct QpSolution {
    pub alpha: Vec<f64>,
    /// Dual objective at `alpha`.
    pub objective: f64,
    /// Primal objective minus dual objective; an upper bound on how far
    /// `objective` is below the optimum.
    pub gap: f64,
    pub bias: f64,
    pub iterations: usize,
}

/// Projects `v` onto `{0 ≤ α ≤ C, yᵀα = 0}`.
pub fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c))
            .collect()
    };
    let residual = |a: &[f64]| -> f64 { a.iter().zip(y).map(|(ai, yi)| ai * yi).sum() };
    let reach = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-reach, reach);
    // residual is non-increasing in mu
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut mu = 0.5 * (lo + hi);
    let mut a = at(mu);
    // the residual is linear in mu on the current segment; finish exactly
    for _ in 0..3 {
        let free = a.iter().filter(|&&x| x > 0.0 && x < c).count();
        if free == 0 {
            break;
        }
        mu += residual(&a) / free as f64;
        a = at(mu);
    }
    a
}

fn quad_form(q: &Dense, a: &[f64]) -> Vec<f64> {
    q.iter()
        .map(|r| r.iter().zip(a).map(|(x, y)| x * y).sum())
        .collect()
}

/// Gershgorin bound on the largest eigenvalue of `q`.
fn spectral_bound(q: &Dense) -> f64 {
    q.iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest total hinge loss over the bias, given the kernel part of the
/// decision values. The loss is convex and piecewise linear in `b`, so the
/// minimum sits on a breakpoint `b = y_i − f_i`.
pub fn best_bias(f: &[f64], y: &[f64]) -> (f64, f64) {
    let hinge = |b: f64| -> f64 {
        f.iter()
            .zip(y)
            .map(|(fi, yi)| (1.0 - yi * (fi + b)).max(0.0))
            .sum()
    };
    let mut best = (0.0, hinge(0.0));
    for (fi, yi) in f.iter().zip(y) {
        let b = yi - fi;
        let h = hinge(b);
        if h < best.1 {
            best = (b, h);
        }
    }
    best
}

pub fn gap_at(k: &Dense, y: &[f64], alpha: &[f64], c: f64) -> (f64, f64, f64) {
    let p = y.len();
    let f: Vec<f64> = (0..p)
        .map(|i| (0..p).map(|j| alpha[j] * y[j] * k[i][j]).sum())
        .collect();
    let w2: f64 = (0..p).map(|i| alpha[i] * y[i] * f[i]).sum();
    let dual = alpha.iter().sum::<f64>() - 0.5 * w2;
    let (bias, hinge) = best_bias(&f, y);
    let primal = 0.5 * w2 + c * hinge;
    (dual, primal - dual, bias)
}

/// Runs until the gap falls below `rel_gap · max(1, |dual|)` or
/// `max_iterations` is reached.
pub fn solve_dual(k: &Dense, y: &[f64], c: f64, rel_gap: f64, max_iterations: usize) -> QpSolution {
    let p = y.len();
    let q: Dense = (0..p)
        .map(|i| (0..p).map(|j| y[i] * y[j] * k[i][j]).collect())
        .collect();
    let lipschitz = spectral_bound(&q) + 1e-12;
    let step = 1.0 / lipschitz;

    let mut x = project(&vec![0.0; p], y, c);
    let mut z = x.clone();
    let mut t: f64 = 1.0;
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let qz = quad_form(&q, &z);
        let moved: Vec<f64> = (0..p).map(|i| z[i] - step * (qz[i] - 1.0)).collect();
        let next = project(&moved, y, c);
        let restart: f64 = (0..p).map(|i| (z[i] - next[i]) * (next[i] - x[i])).sum();
        if restart > 0.0 {
            t = 1.0;
            z = next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            z = (0..p).map(|i| next[i] + beta * (next[i] - x[i])).collect();
            t = t_next;
        }
        x = next;
        if iterations % 25 == 0 {
            let (dual, gap, _) = gap_at(k, y, &x, c);
            if gap <= rel_gap * dual.abs().max(1.0) {
                break;
            }
        }
    }
    let (objective, gap, bias) = gap_at(k, y, &x, c);
    QpSolution {
        alpha: x,
        objective,
        gap,
        bias,
        iterations,
    }
}
