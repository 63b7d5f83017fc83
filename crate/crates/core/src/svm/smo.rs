//! Sequential minimal optimization for the C-SVM dual
//!
//! ```text
//! max  Σα_i − ½ ΣΣ α_i α_j y_i y_j K(x_i, x_j)
//! s.t. 0 ≤ α_i ≤ C,  Σ y_i α_i = 0
//! ```
//!
//! Each step starts from the two extreme KKT violators and pairs one of them
//! with the feasible partner promising the largest objective gain
//! (second-order selection, `b² / a` with `a` the pair's curvature). The pair
//! is optimized in closed form and the gradient is updated incrementally.
//! After ten passes, each pass boundary also tries a Newton step on the free
//! set, which rescues nearly singular kernels where pair updates crawl.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::linalg::{symmetric_eigen, Matrix};
use crate::{Error, Result};

/// Curvature floor for pairs with a non-positive second derivative.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoConfig {
    /// KKT tolerance τ every training point must meet after training.
    pub kkt_tolerance: f64,
    /// Stop once the maximal violating pair's gap `m(α) − M(α)` drops below
    /// this value.
    pub stop_gap: f64,
    /// Iteration cap expressed in passes of `p` pair updates; `None` means
    /// `100 · p` passes.
    pub max_passes: Option<usize>,
    /// Precompute the Gram matrix up to this many training points.
    pub full_gram_limit: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-3,
            stop_gap: 1e-9,
            max_passes: None,
            full_gram_limit: 5000,
        }
    }
}

/// Converged multipliers, bias and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub objective: f64,
    pub max_kkt_violation: f64,
}

enum Gram<'a> {
    Full(Vec<f64>),
    OnDemand { x: &'a Matrix, kernel: Kernel },
}

impl Gram<'_> {
    fn new<'a>(x: &'a Matrix, kernel: Kernel, full_limit: usize) -> Gram<'a> {
        let p = x.rows();
        if p <= full_limit {
            let mut k = vec![0.0; p * p];
            for i in 0..p {
                for j in i..p {
                    let v = kernel.apply(x.row(i), x.row(j));
                    k[i * p + j] = v;
                    k[j * p + i] = v;
                }
            }
            Gram::Full(k)
        } else {
            Gram::OnDemand { x, kernel }
        }
    }

    fn row(&self, i: usize, p: usize) -> Cow<'_, [f64]> {
        match self {
            Gram::Full(k) => Cow::Borrowed(&k[i * p..(i + 1) * p]),
            Gram::OnDemand { x, kernel } => {
                let xi = x.row(i);
                Cow::Owned((0..p).map(|j| kernel.apply(xi, x.row(j))).collect())
            }
        }
    }

    fn diag(&self, p: usize) -> Vec<f64> {
        match self {
            Gram::Full(k) => (0..p).map(|i| k[i * p + i]).collect(),
            Gram::OnDemand { x, kernel } => {
                (0..p).map(|i| kernel.apply(x.row(i), x.row(i))).collect()
            }
        }
    }
}

#[inline]
fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    if y > 0.0 {
        alpha < c
    } else {
        alpha > 0.0
    }
}

#[inline]
fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    if y > 0.0 {
        alpha > 0.0
    } else {
        alpha < c
    }
}

/// Solves the dual for features `x` and labels `y ∈ {−1, +1}`.
pub fn solve(
    x: &Matrix,
    y: &[f64],
    kernel: Kernel,
    c: f64,
    config: &SmoConfig,
) -> Result<DualSolution> {
    let p = x.rows();
    debug_assert_eq!(p, y.len());
    let gram = Gram::new(x, kernel, config.full_gram_limit);
    let kd = gram.diag(p);

    let mut alpha = vec![0.0; p];
    // gradient of ½αᵀQα − eᵀα, Q_ij = y_i y_j K_ij
    let mut grad = vec![-1.0; p];
    let max_iterations = config
        .max_passes
        .unwrap_or(100 * p)
        .saturating_mul(p)
        .max(1);
    let mut iterations = 0;

    loop {
        // extreme violators: argmax over I_up and argmin over I_low of −y G
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let mut top = usize::MAX;
        let mut bottom = usize::MAX;
        for t in 0..p {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t], c) && v > gmax {
                gmax = v;
                top = t;
            }
            if in_low(alpha[t], y[t], c) && v < gmin {
                gmin = v;
                bottom = t;
            }
        }
        if top == usize::MAX || bottom == usize::MAX || gmax - gmin <= config.stop_gap {
            break;
        }
        if iterations >= max_iterations {
            let bias = bias_from(&alpha, y, &grad, c);
            return Err(Error::NonConvergence {
                iterations,
                max_violation: max_kkt_violation(&alpha, y, &grad, bias, c),
            });
        }
        iterations += 1;
        if iterations % p == 0
            && iterations >= NEWTON_AFTER_PASSES * p
            && newton_step(&gram, y, c, &mut alpha, &mut grad)
        {
            continue;
        }

        // Best second-order partner of each extreme violator; the larger gain
        // wins. Trying both sides keeps the path symmetric under label flips,
        // which swap the roles of I_up and I_low.
        let k_top = gram.row(top, p);
        let k_bottom = gram.row(bottom, p);
        let gain = |b: f64, curvature: f64| b * b / positive_or_tau(curvature);
        let (mut gain_top, mut partner_top) = (0.0, bottom);
        let (mut gain_bottom, mut partner_bottom) = (0.0, top);
        for t in 0..p {
            let v = -y[t] * grad[t];
            if in_low(alpha[t], y[t], c) && gmax - v > 0.0 {
                let g = gain(gmax - v, kd[top] + kd[t] - 2.0 * k_top[t]);
                if g > gain_top {
                    gain_top = g;
                    partner_top = t;
                }
            }
            if in_up(alpha[t], y[t], c) && v - gmin > 0.0 {
                let g = gain(v - gmin, kd[t] + kd[bottom] - 2.0 * k_bottom[t]);
                if g > gain_bottom {
                    gain_bottom = g;
                    partner_bottom = t;
                }
            }
        }
        let pair_key = |a: usize, b: usize| (a.min(b), a.max(b));
        let take_top = gain_top > gain_bottom
            || (gain_top == gain_bottom
                && pair_key(top, partner_top) <= pair_key(partner_bottom, bottom));
        let (i, j) = if take_top {
            (top, partner_top)
        } else {
            (partner_bottom, bottom)
        };
        let ki = if i == top { k_top } else { gram.row(i, p) };
        let kj = if j == bottom {
            k_bottom
        } else {
            gram.row(j, p)
        };
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_ai, old_aj);

        if y[i] != y[j] {
            let quad = positive_or_tau(kd[i] + kd[j] - 2.0 * ki[j]);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = positive_or_tau(kd[i] + kd[j] - 2.0 * ki[j]);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        // G_t += Q_ti Δα_i + Q_tj Δα_j
        let di = (ai - old_ai) * y[i];
        let dj = (aj - old_aj) * y[j];
        for t in 0..p {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    // after the loop only: snapping mid-run can undo a tiny step and stall
    for t in 0..p {
        let snapped = snap_to_bounds(alpha[t], c);
        if snapped != alpha[t] {
            let dt = (snapped - alpha[t]) * y[t];
            let kt = gram.row(t, p);
            for (s, g) in grad.iter_mut().enumerate() {
                *g += y[s] * kt[s] * dt;
            }
            alpha[t] = snapped;
        }
    }

    let bias = bias_from(&alpha, y, &grad, c);
    let objective = alpha.iter().sum::<f64>() * 0.5
        - 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();
    let max_kkt_violation = max_kkt_violation(&alpha, y, &grad, bias, c);
    if max_kkt_violation > config.kkt_tolerance {
        return Err(Error::NonConvergence {
            iterations,
            max_violation: max_kkt_violation,
        });
    }
    Ok(DualSolution {
        alpha,
        bias,
        iterations,
        objective,
        max_kkt_violation,
    })
}

/// Passes of plain pair updates before free-set Newton steps kick in.
const NEWTON_AFTER_PASSES: usize = 10;
/// Largest free set the Newton step will factor.
const NEWTON_MAX_FREE: usize = 256;

// Pair updates crawl when the free multipliers span a nearly singular block
// of Q (e.g. a low-degree polynomial kernel with more free points than
// feature-space dimensions). The Newton step solves the bordered face system
//
//   [Q_FF  y_F] [Δ]   [−G_F]
//   [y_Fᵀ   0 ] [ν] = [  0 ]
//
// by pseudo-inverse, walks along Δ as far as the box allows, and keeps the
// move only if the objective drops. When −G_F has a real component in the
// null space of M the face objective is unbounded below along it, and the
// step follows that ray to the box instead. Returns whether α changed.
fn newton_step(gram: &Gram<'_>, y: &[f64], c: f64, alpha: &mut [f64], grad: &mut [f64]) -> bool {
    let p = alpha.len();
    let free: Vec<usize> = (0..p).filter(|&t| alpha[t] > 0.0 && alpha[t] < c).collect();
    let n = free.len();
    if n < 2 || n > NEWTON_MAX_FREE {
        return false;
    }
    let rows: Vec<Cow<'_, [f64]>> = free.iter().map(|&k| gram.row(k, p)).collect();
    let mut m = Matrix::zeros(n + 1, n + 1);
    for (a, &ka) in free.iter().enumerate() {
        for (b, &kb) in free.iter().enumerate() {
            m[(a, b)] = y[ka] * y[kb] * rows[a][kb];
        }
        m[(a, n)] = y[ka];
        m[(n, a)] = y[ka];
    }
    let Ok(eig) = symmetric_eigen(&m) else {
        return false;
    };
    let scale = eig.values.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    let mut rhs: Vec<f64> = free.iter().map(|&k| -grad[k]).collect();
    rhs.push(0.0);
    // Newton part on the range of M; projection of −G onto its null space.
    // A null direction u has Q_FF u = −w y_F and y_Fᵀu = 0, so the objective
    // is linear along it and only the box stops the descent.
    let mut newton = vec![0.0; n];
    let mut ray = vec![0.0; n];
    let mut ray_weight = 0.0;
    for (k, &lambda) in eig.values.iter().enumerate() {
        let proj = (0..=n).map(|r| eig.vectors[(r, k)] * rhs[r]).sum::<f64>();
        let (target, w) = if lambda.abs() <= NEWTON_RCOND * scale {
            ray_weight += proj * proj;
            (&mut ray, proj)
        } else {
            (&mut newton, proj / lambda)
        };
        for (a, d) in target.iter_mut().enumerate() {
            *d += w * eig.vectors[(a, k)];
        }
    }
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut delta, max_step) = if ray_weight.sqrt() > NEWTON_RAY_THRESHOLD * rhs_norm.max(1.0) {
        (ray, f64::INFINITY)
    } else {
        (newton, 1.0)
    };
    // keep Σ y_k Δ_k = 0 exactly up to rounding
    let drift = free.iter().zip(&delta).map(|(&k, d)| y[k] * d).sum::<f64>() / n as f64;
    for (a, &k) in free.iter().enumerate() {
        delta[a] -= y[k] * drift;
    }

    let mut step = max_step;
    let mut blocking = None;
    for (a, &k) in free.iter().enumerate() {
        let room = if delta[a] > 0.0 {
            (c - alpha[k]) / delta[a]
        } else if delta[a] < 0.0 {
            alpha[k] / -delta[a]
        } else {
            continue;
        };
        if room < step {
            step = room;
            blocking = Some(a);
        }
    }
    // objective change along the step: t G_Fᵀ Δ + ½ t² Δᵀ Q_FF Δ
    let linear: f64 = free.iter().zip(&delta).map(|(&k, d)| grad[k] * d).sum();
    let quadratic: f64 = (0..n)
        .map(|a| {
            let qd: f64 = (0..n).map(|b| m[(a, b)] * delta[b]).sum();
            delta[a] * qd
        })
        .sum();
    let change = step * linear + 0.5 * step * step * quadratic;
    if !step.is_finite() || !(change < 0.0) {
        return false;
    }

    for (a, &k) in free.iter().enumerate() {
        let old = alpha[k];
        let mut new = if blocking == Some(a) {
            if delta[a] > 0.0 {
                c
            } else {
                0.0
            }
        } else {
            (old + step * delta[a]).clamp(0.0, c)
        };
        if new == old {
            continue;
        }
        if new != c && new != 0.0 {
            new = snap_to_bounds(new, c);
        }
        let dk = (new - old) * y[k];
        for (t, g) in grad.iter_mut().enumerate() {
            *g += y[t] * rows[a][t] * dk;
        }
        alpha[k] = new;
    }
    true
}

/// Relative eigenvalue cutoff for the Newton step's pseudo-inverse.
const NEWTON_RCOND: f64 = 1e-12;
/// Null-space share of −G_F above which the step follows the null ray.
const NEWTON_RAY_THRESHOLD: f64 = 1e-8;

/// Multipliers within this fraction of `C` from a bound are put on it.
const BOUND_SNAP: f64 = 1e-12;

// A multiplier a few ulps inside a bound would count as free and pin the
// bias, while its exact-bound twin leaves the bias at the interval midpoint.
// Snapping keeps that choice independent of rounding and row order.
#[inline]
fn snap_to_bounds(a: f64, c: f64) -> f64 {
    if a < BOUND_SNAP * c {
        0.0
    } else if a > c - BOUND_SNAP * c {
        c
    } else {
        a
    }
}

#[inline]
fn positive_or_tau(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        TAU
    }
}

/// Average of `−y_i G_i` over free multipliers, or the midpoint of the
/// feasible interval when every multiplier sits at a bound.
fn bias_from(alpha: &[f64], y: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut sum = 0.0;
    let mut free = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            sum += v;
            free += 1;
        } else {
            // at a bound, v is a one-sided limit on the bias
            let upper = (alpha[t] == 0.0) == (y[t] < 0.0);
            if upper {
                ub = ub.min(v);
            } else {
                lb = lb.max(v);
            }
        }
    }
    if free > 0 {
        sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

/// Largest KKT residual with `y_i f(x_i) = G_i + 1 + y_i b`.
fn max_kkt_violation(alpha: &[f64], y: &[f64], grad: &[f64], bias: f64, c: f64) -> f64 {
    let mut worst = 0.0_f64;
    for t in 0..alpha.len() {
        let margin = grad[t] + 1.0 + y[t] * bias;
        let v = kkt_residual(alpha[t], margin, c);
        worst = worst.max(v);
    }
    worst
}

/// Residual of one point's KKT condition given `y f(x)`.
pub fn kkt_residual(alpha: f64, margin: f64, c: f64) -> f64 {
    if alpha <= 0.0 {
        (1.0 - margin).max(0.0)
    } else if alpha >= c {
        (margin - 1.0).max(0.0)
    } else {
        (margin - 1.0).abs()
    }
}
