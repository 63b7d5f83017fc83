//! Brute-force symmetric eigensolvers.
//!
//! Small matrices (n <= 4) go through the characteristic polynomial: its
//! coefficients come from the Faddeev-LeVerrier recursion, the real roots
//! are bracketed by the roots of its derivative and bisected, and each root
//! is turned into an eigenvector by inverse iteration. Larger matrices use
//! power iteration with deflation followed by Rayleigh-quotient refinement.

use super::Dense;

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // twice is enough for numerical orthogonality
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Coefficients `c[0..=n]` of `det(λI − A) = Σ c_k λ^k`.
pub fn characteristic_polynomial(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[n - k + 1];
        }
        let am = matmul(a, &next);
        let trace: f64 = (0..n).map(|i| am[i][i]).sum();
        c[n - k] = -trace / k as f64;
        m = next;
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = horner(c, lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = horner(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ascending roots of a polynomial known to have only real roots.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let deg = c.len() - 1;
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    let bound = 1.0
        + c[..deg]
            .iter()
            .map(|ck| (ck / c[deg]).abs())
            .fold(0.0, f64::max);
    let critical = real_roots(&derivative(c));
    let mut edges = vec![-bound];
    edges.extend(critical);
    edges.push(bound);
    let mut roots = Vec::with_capacity(deg);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (horner(c, lo), horner(c, hi));
        if flo == 0.0 {
            roots.push(lo);
        } else if (flo > 0.0) != (fhi > 0.0) && fhi != 0.0 {
            roots.push(bisect(c, lo, hi));
        } else if fhi == 0.0 || fhi.abs() < flo.abs() {
            // double root sitting on a critical point
            roots.push(hi);
        } else {
            roots.push(lo);
        }
    }
    roots.truncate(deg);
    roots
}

/// Solves `(A − σI) x = b` by Gaussian elimination with partial pivoting.
fn shifted_solve(a: &Dense, sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let mut m: Dense = a.clone();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= sigma;
    }
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        if m[col][col].abs() < 1e-300 * scale {
            m[col][col] = f64::EPSILON * scale;
        }
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let s: f64 = (col + 1..n).map(|k| m[col][k] * x[k]).sum();
        x[col] = (x[col] - s) / m[col][col];
    }
    x
}

fn start_vector(n: usize, k: usize) -> Vec<f64> {
    // deterministic and unlikely to be orthogonal to anything in particular
    (0..n)
        .map(|i| 1.0 + ((i * 7 + k * 13) % 11) as f64 / 10.0 + 0.01 * i as f64)
        .collect()
}

/// Inverse iteration at a fixed shift, kept orthogonal to `found`. Returns
/// the Rayleigh quotient and the unit vector.
fn inverse_iteration(a: &Dense, sigma: f64, found: &[Vec<f64>], k: usize) -> (f64, Vec<f64>) {
    let n = a.len();
    let mut v = start_vector(n, k);
    orthogonalize(&mut v, found);
    normalize(&mut v);
    for _ in 0..6 {
        let mut x = shifted_solve(a, sigma, &v);
        orthogonalize(&mut x, found);
        if normalize(&mut x) == 0.0 || !x.iter().all(|t| t.is_finite()) {
            break;
        }
        v = x;
    }
    (dot(&v, &matvec(a, &v)), v)
}

fn sort_descending(mut pairs: Vec<(f64, Vec<f64>)>) -> (Vec<f64>, Vec<Vec<f64>>) {
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().unzip()
}

pub fn eigen_via_polynomial(a: &Dense) -> (Vec<f64>, Vec<Vec<f64>>) {
    let roots = real_roots(&characteristic_polynomial(a));
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut pairs = Vec::new();
    for (k, &r) in roots.iter().enumerate().rev() {
        let (value, v) = inverse_iteration(a, r, &found, k);
        found.push(v.clone());
        pairs.push((value, v));
    }
    sort_descending(pairs)
}

pub fn eigen_via_power_iteration(a: &Dense) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut deflated = a.clone();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut pairs = Vec::new();
    for k in 0..n {
        let mut v = start_vector(n, k);
        orthogonalize(&mut v, &found);
        normalize(&mut v);
        for _ in 0..20_000 {
            let mut w = matvec(&deflated, &v);
            orthogonalize(&mut w, &found);
            if normalize(&mut w) == 0.0 {
                break;
            }
            let change: f64 = w.iter().zip(&v).map(|(x, y)| (x - y).abs()).sum();
            v = w;
            if change < 1e-10 {
                break;
            }
        }
        let sigma = dot(&v, &matvec(a, &v));
        // refine from the power-iteration estimate
        let (value, v) = {
            let mut v = v;
            let mut shift = sigma;
            for _ in 0..4 {
                let mut x = shifted_solve(a, shift, &v);
                orthogonalize(&mut x, &found);
                if normalize(&mut x) == 0.0 || !x.iter().all(|t| t.is_finite()) {
                    break;
                }
                v = x;
                shift = dot(&v, &matvec(a, &v));
            }
            (dot(&v, &matvec(a, &v)), v)
        };
        for i in 0..n {
            for j in 0..n {
                deflated[i][j] -= value * v[i] * v[j];
            }
        }
        found.push(v.clone());
        pairs.push((value, v));
    }
    sort_descending(pairs)
}

/// Dispatches on size: characteristic polynomial up to 4x4, power
/// iteration beyond.
pub fn symmetric_eigen_oracle(a: &Dense) -> (Vec<f64>, Vec<Vec<f64>>) {
    if a.len() <= 4 {
        eigen_via_polynomial(a)
    } else {
        eigen_via_power_iteration(a)
    }
}

/// Largest eigenvalue difference and largest subspace sine between two
/// decompositions. Eigenvalues closer than `cluster` are compared as one
/// invariant subspace through their orthogonal projectors.
pub fn compare(
    values: &[f64],
    vectors: &[Vec<f64>],
    ref_values: &[f64],
    ref_vectors: &[Vec<f64>],
    cluster: f64,
) -> (f64, f64) {
    let n = values.len();
    let value_err = values
        .iter()
        .zip(ref_values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut angle_err: f64 = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (ref_values[end - 1] - ref_values[end]).abs() <= cluster {
            end += 1;
        }
        let mut diff = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p: f64 = (start..end).map(|k| vectors[k][i] * vectors[k][j]).sum();
                let q: f64 = (start..end)
                    .map(|k| ref_vectors[k][i] * ref_vectors[k][j])
                    .sum();
                diff += (p - q) * (p - q);
            }
        }
        // ‖P − Q‖_F = √2 · ‖sin Θ‖_F
        angle_err = angle_err.max((diff / 2.0).sqrt());
        start = end;
    }
    (value_err, angle_err)
}
