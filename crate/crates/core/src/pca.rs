//! Principal component analysis on the sample covariance matrix.
//!
//! Inputs are centered (optionally standardized, see
//! [`PcaOptions::correlation`]); the covariance uses the `rows - 1` divisor
//! and is diagonalized with [`crate::linalg::symmetric_eigen`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{symmetric_eigen, Matrix};
use crate::{Error, Result};

/// Eigenvalues in `(-EIGEN_CLAMP * max, 0)` are rounding noise and become 0.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// Default cumulative-contribution threshold for component selection.
pub const DEFAULT_THRESHOLD: f64 = 0.70;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PcaOptions {
    /// Divide each centered column by its sample standard deviation, i.e.
    /// diagonalize the correlation matrix instead of the covariance.
    #[serde(default)]
    pub correlation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Per-column divisor applied after centering, when fitted on the
    /// correlation matrix.
    pub scale: Option<Vec<f64>>,
    /// Descending, non-negative.
    pub eigenvalues: Vec<f64>,
    /// Unit-norm eigenvectors as columns (`n_inputs x n_inputs`).
    pub eigenvectors: Matrix,
    pub n_inputs: usize,
}

/// Covariance PCA with default options.
pub fn fit_pca(data: &Matrix) -> Result<PcaModel> {
    fit_pca_with(data, PcaOptions::default())
}

pub fn fit_pca_with(data: &Matrix, options: PcaOptions) -> Result<PcaModel> {
    let (rows, cols) = (data.rows(), data.cols());
    if rows < 2 {
        return Err(Error::domain("PCA needs at least two observations"));
    }
    if cols == 0 {
        return Err(Error::domain("PCA needs at least one variable"));
    }
    if !data.is_finite() {
        return Err(Error::validation("PCA input has non-finite entries"));
    }

    let mut mean = vec![0.0; cols];
    for row in data.row_iter() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);

    let mut centered = data.clone();
    for i in 0..rows {
        for (x, m) in centered.row_mut(i).iter_mut().zip(&mean) {
            *x -= m;
        }
    }

    let scale = if options.correlation {
        let mut sd = vec![0.0; cols];
        for row in centered.row_iter() {
            for (s, x) in sd.iter_mut().zip(row) {
                *s += x * x;
            }
        }
        // a constant column stays all-zero; leave it unscaled
        for s in sd.iter_mut() {
            *s = (*s / (rows - 1) as f64).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        for i in 0..rows {
            for (x, s) in centered.row_mut(i).iter_mut().zip(&sd) {
                *x /= s;
            }
        }
        Some(sd)
    } else {
        None
    };

    let mut cov = centered.transpose().matmul(&centered)?;
    let denom = (rows - 1) as f64;
    for i in 0..cols {
        for j in 0..cols {
            cov[(i, j)] /= denom;
        }
    }
    // matmul accumulation order can leave the two triangles a few ulps apart
    for i in 0..cols {
        for j in 0..i {
            let avg = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = avg;
            cov[(j, i)] = avg;
        }
    }

    let eig = symmetric_eigen(&cov)?;
    let mut eigenvalues = eig.values;
    let largest = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    for v in eigenvalues.iter_mut() {
        if *v < 0.0 {
            if *v > -EIGEN_CLAMP * largest {
                *v = 0.0;
            } else {
                return Err(Error::Internal(format!(
                    "covariance has a negative eigenvalue {v:e} (largest {largest:e})"
                )));
            }
        }
    }

    Ok(PcaModel {
        mean,
        scale,
        eigenvalues,
        eigenvectors: eig.vectors,
        n_inputs: cols,
    })
}

/// Share of total variance carried by each component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionReport {
    pub eigenvalues: Vec<f64>,
    pub rates: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub selected_m: Option<usize>,
}

impl ContributionReport {
    /// Records the component count chosen for `threshold`.
    pub fn with_selection(mut self, threshold: f64) -> Self {
        self.selected_m = Some(select_components(&self, threshold));
        self
    }
}

/// `rate_k = λ_k / Σλ` and the running sum of the rates.
pub fn contribution(model: &PcaModel) -> Result<ContributionReport> {
    let total: f64 = model.eigenvalues.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateData(
            "all eigenvalues are zero; the input has no variance".into(),
        ));
    }
    let rates: Vec<f64> = model.eigenvalues.iter().map(|l| l / total).collect();
    let mut acc = 0.0;
    let cumulative = rates
        .iter()
        .map(|r| {
            acc += r;
            acc
        })
        .collect();
    Ok(ContributionReport {
        eigenvalues: model.eigenvalues.clone(),
        rates,
        cumulative,
        selected_m: None,
    })
}

/// Smallest `m` whose cumulative rate reaches `threshold`. When rounding
/// keeps the final cumulative value just under the threshold, all
/// components are selected.
pub fn select_components(report: &ContributionReport, threshold: f64) -> usize {
    report
        .cumulative
        .iter()
        .position(|c| *c >= threshold)
        .map_or(report.cumulative.len(), |k| k + 1)
}

impl PcaModel {
    /// Applies the fitted centering (and scaling) to one row.
    fn standardize(&self, row: &[f64], out: &mut [f64]) {
        for (k, (o, x)) in out.iter_mut().zip(row).enumerate() {
            *o = x - self.mean[k];
            if let Some(scale) = &self.scale {
                *o /= scale[k];
            }
        }
    }

    /// Scores of each row on the first `m` components.
    pub fn project(&self, data: &Matrix, m: usize) -> Result<Matrix> {
        if data.cols() != self.n_inputs {
            return Err(Error::domain(format!(
                "projection input has {} columns, model expects {}",
                data.cols(),
                self.n_inputs
            )));
        }
        if m == 0 || m > self.n_inputs {
            return Err(Error::domain(format!(
                "cannot keep {m} of {} components",
                self.n_inputs
            )));
        }
        let mut out = Matrix::zeros(data.rows(), m);
        let mut z = vec![0.0; self.n_inputs];
        for i in 0..data.rows() {
            self.standardize(data.row(i), &mut z);
            for k in 0..m {
                out[(i, k)] = (0..self.n_inputs)
                    .map(|r| z[r] * self.eigenvectors[(r, k)])
                    .sum();
            }
        }
        Ok(out)
    }

    /// Loadings of every input variable on the first two components
    /// (`n_inputs x 2`). With `scaled`, column `k` is multiplied by `√λ_k`.
    pub fn biplot_loadings(&self, scaled: bool) -> Result<Matrix> {
        if self.n_inputs < 2 {
            return Err(Error::domain("biplot needs at least two components"));
        }
        let mut out = Matrix::zeros(self.n_inputs, 2);
        for k in 0..2 {
            let factor = if scaled {
                self.eigenvalues[k].max(0.0).sqrt()
            } else {
                1.0
            };
            for r in 0..self.n_inputs {
                out[(r, k)] = self.eigenvectors[(r, k)] * factor;
            }
        }
        Ok(out)
    }
}
