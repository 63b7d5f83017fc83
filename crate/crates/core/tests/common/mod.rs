//! Shared test helpers. The reference solvers share no code with the
//! library; they are slow and simple on purpose.

#![allow(dead_code)]

pub mod eigen;
pub mod qp;

use pcasvm_core::baselines::{MlpConfig, MlpModel};
use pcasvm_core::svm::{train_with, Kernel, SmoConfig, TrainingSet};
use pcasvm_core::{Direction, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn to_dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn to_matrix(rows: &Dense) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

/// Sample covariance with the `n - 1` divisor, two-pass.
pub fn covariance(data: &Dense) -> Dense {
    let n = data.len();
    let d = data[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = data
                .iter()
                .map(|r| (r[i] - mean[i]) * (r[j] - mean[j]))
                .sum();
            cov[i][j] = s / (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    cov
}

/// Random data matrix with uneven column scales. `rows <= cols` gives a
/// rank-deficient covariance.
pub fn random_data(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dense {
    let scales: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.1..3.0)).collect();
    // a shared factor makes the spectrum uneven
    let mix: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (0..rows)
        .map(|_| {
            let f = gaussian(rng);
            (0..cols)
                .map(|j| scales[j] * gaussian(rng) + mix[j] * f)
                .collect()
        })
        .collect()
}

pub fn kernel_value(kernel: &Kernel, a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    match *kernel {
        Kernel::Linear => dot,
        Kernel::Polynomial { degree, coef0 } => {
            let mut v = 1.0;
            for _ in 0..degree {
                v *= dot + coef0;
            }
            v
        }
        Kernel::Rbf { gamma } => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-gamma * d2).exp()
        }
    }
}

pub fn gram(kernel: &Kernel, x: &Dense) -> Dense {
    x.iter()
        .map(|a| x.iter().map(|b| kernel_value(kernel, a, b)).collect())
        .collect()
}

pub fn signs(labels: &[Direction]) -> Vec<f64> {
    labels
        .iter()
        .map(|l| if *l == Direction::Up { 1.0 } else { -1.0 })
        .collect()
}

/// Random SVM instance: two shifted Gaussian clouds in `[-1, 1]^d`-ish
/// range, always with both classes present.
pub fn random_svm_instance(
    rng: &mut ChaCha8Rng,
    p: usize,
    d: usize,
    separation: f64,
) -> TrainingSet {
    let mut rows = Vec::with_capacity(p);
    let mut labels = Vec::with_capacity(p);
    for i in 0..p {
        let up = if i < 2 { i == 0 } else { rng.gen_bool(0.5) };
        let shift = if up { separation } else { -separation };
        rows.push(
            (0..d)
                .map(|_| 0.5 * gaussian(rng) + shift)
                .collect::<Vec<f64>>(),
        );
        labels.push(if up { Direction::Up } else { Direction::Down });
    }
    TrainingSet::new(to_matrix(&rows), labels).unwrap()
}

pub fn random_kernel(rng: &mut ChaCha8Rng) -> Kernel {
    match rng.gen_range(0..3) {
        0 => Kernel::Linear,
        1 => Kernel::Polynomial {
            degree: rng.gen_range(2..=3),
            coef0: 1.0,
        },
        _ => Kernel::Rbf {
            gamma: rng.gen_range(0.1..2.0),
        },
    }
}

/// Dual objective `Σα − ½ Σ α_i α_j y_i y_j K_ij` evaluated from scratch.
pub fn dual_objective(k: &Dense, y: &[f64], alpha: &[f64]) -> f64 {
    let p = y.len();
    let mut quad = 0.0;
    for i in 0..p {
        for j in 0..p {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Largest KKT violation of `(alpha, bias)` with margins recomputed here.
pub fn kkt_audit(k: &Dense, y: &[f64], alpha: &[f64], bias: f64, c: f64) -> f64 {
    let p = y.len();
    let mut worst: f64 = 0.0;
    for i in 0..p {
        let f: f64 = (0..p).map(|j| alpha[j] * y[j] * k[i][j]).sum::<f64>() + bias;
        let margin = y[i] * f;
        let v = if alpha[i] <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if alpha[i] >= c {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Central differences of the mean loss with respect to every parameter.
pub fn finite_difference_gradient(model: &MlpModel, data: &TrainingSet, step: f64) -> Vec<f64> {
    let base = model.parameters();
    (0..base.len())
        .map(|k| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[k] += step;
            minus[k] -= step;
            let lp = model.with_parameters(&plus).unwrap().loss(data).unwrap();
            let lm = model.with_parameters(&minus).unwrap().loss(data).unwrap();
            (lp - lm) / (plus[k] - minus[k])
        })
        .collect()
}

/// Relative error with a small floor on the denominator, so components that
/// are essentially zero are judged on an absolute scale.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Random instance: `p ≤ 50`, `d ≤ 5`, any kernel, `C ∈ {1, 100}`.
pub fn random_svm_problem(seed: u64) -> (TrainingSet, Kernel, f64) {
    let mut g = rng(seed);
    let p = g.gen_range(4..=50);
    let d = g.gen_range(1..=5);
    let separation = g.gen_range(0.0..0.8);
    let data = random_svm_instance(&mut g, p, d, separation);
    let kernel = random_kernel(&mut g);
    let c = if g.gen_bool(0.5) { 1.0 } else { 100.0 };
    (data, kernel, c)
}

/// Trains with SMO and compares against the dense oracle. Panics on
/// infeasible multipliers; returns the relative objective difference and
/// the audited KKT violation.
pub fn oracle_check(data: &TrainingSet, kernel: Kernel, c: f64) -> (f64, f64) {
    let fit = train_with(data, kernel, c, &SmoConfig::default()).unwrap();
    let x = to_dense(data.features());
    let y = signs(data.labels());
    let k = gram(&kernel, &x);

    for a in &fit.alpha {
        assert!(*a >= 0.0 && *a <= c, "alpha {a} outside [0, {c}]");
    }
    let balance: f64 = fit.alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum();
    assert!(balance.abs() <= 1e-8 * c.max(1.0), "Σ yα = {balance}");

    let ours = dual_objective(&k, &y, &fit.alpha);
    assert!(
        (ours - fit.model.diagnostics.objective).abs() <= 1e-9 * ours.abs().max(1.0),
        "reported objective {} vs recomputed {ours}",
        fit.model.diagnostics.objective
    );
    let oracle = qp::solve_dual(&k, &y, c, 1e-10, 400_000);
    assert!(
        oracle.gap <= 1e-8 * oracle.objective.abs().max(1.0),
        "oracle did not certify: gap {} objective {}",
        oracle.gap,
        oracle.objective
    );
    // the optimum lies in [oracle.objective, oracle.objective + gap]
    let below = (oracle.objective - ours).max(0.0);
    let above = (ours - oracle.objective - oracle.gap).max(0.0);
    let rel = below.max(above) / oracle.objective.abs().max(1e-12);
    (rel, kkt_audit(&k, &y, &fit.alpha, fit.model.bias, c))
}

pub const FD_STEP: f64 = 1e-6;
// finite differences of an O(1) loss carry ~1e-10 of rounding noise, so
// near-zero components are compared on this absolute scale
pub const FD_FLOOR: f64 = 1e-4;

/// Network with Gaussian parameters and a matching random data set.
pub fn random_network(seed: u64, d: usize, h: usize, samples: usize) -> (MlpModel, TrainingSet) {
    let mut g = rng(seed);
    let config = MlpConfig {
        hidden: h,
        ..MlpConfig::default()
    };
    let model = MlpModel::init(d, config).unwrap();
    let params: Vec<f64> = model
        .parameters()
        .iter()
        .map(|_| 0.8 * gaussian(&mut g))
        .collect();
    let model = model.with_parameters(&params).unwrap();
    let rows: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..d).map(|_| g.gen_range(-2.0..2.0)).collect())
        .collect();
    let labels = (0..samples)
        .map(|_| {
            if g.gen_bool(0.5) {
                Direction::Up
            } else {
                Direction::Down
            }
        })
        .collect();
    (model, TrainingSet::new(to_matrix(&rows), labels).unwrap())
}

/// Largest relative error between the analytic gradient and central
/// differences.
pub fn max_gradient_error(model: &MlpModel, data: &TrainingSet) -> f64 {
    let (_, grad) = model.loss_and_gradient(data).unwrap();
    let analytic = grad.flatten();
    let numeric = finite_difference_gradient(model, data, FD_STEP);
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| relative_error(*a, *n, FD_FLOOR))
        .fold(0.0, f64::max)
}
