//! Soft-margin binary kernel SVM.
//!
//! Labels are encoded internally as up → `+1`, down → `−1`; the decision
//! function is `f(x) = Σ_s c_s K(sv_s, x) + b` with signed coefficients
//! `c_s = y_s α_s`, and a non-negative value predicts up.

mod kernel;
pub mod smo;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use kernel::{kernel_eval, Kernel};
pub use smo::SmoConfig;

use crate::linalg::Matrix;
use crate::timeseries::Direction;
use crate::{Error, Result};

/// Regularization constant used unless configured otherwise.
pub const DEFAULT_C: f64 = 100.0;

/// Default RBF width for `dim` features: `1 / dim`.
pub fn default_gamma(dim: usize) -> f64 {
    1.0 / dim.max(1) as f64
}

/// Feature rows with one direction label each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    features: Matrix,
    labels: Vec<Direction>,
}

impl TrainingSet {
    pub fn new(features: Matrix, labels: Vec<Direction>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::domain(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if !features.is_finite() {
            return Err(Error::validation(
                "training features contain non-finite values",
            ));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Direction] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&Direction::Up) && self.labels.contains(&Direction::Down)
    }

    /// Same rows with every label flipped.
    pub fn flipped(&self) -> Self {
        Self {
            features: self.features.clone(),
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingDiagnostics {
    pub iterations: usize,
    pub max_kkt_violation: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Matrix,
    /// `y_s α_s` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    #[serde(rename = "C")]
    pub c: f64,
    pub diagnostics: TrainingDiagnostics,
}

/// Trained model plus the full multiplier vector (one per training row).
#[derive(Debug, Clone, PartialEq)]
pub struct SvmFit {
    pub model: SvmModel,
    pub alpha: Vec<f64>,
}

/// Trains with the default solver settings.
pub fn train(data: &TrainingSet, kernel: Kernel, c: f64) -> Result<SvmModel> {
    train_with(data, kernel, c, &SmoConfig::default()).map(|fit| fit.model)
}

pub fn train_with(
    data: &TrainingSet,
    kernel: Kernel,
    c: f64,
    config: &SmoConfig,
) -> Result<SvmFit> {
    kernel.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::validation(format!("C must be positive, got {c}")));
    }
    if !data.has_both_classes() {
        return Err(Error::DegenerateTraining(
            "training labels contain a single direction".into(),
        ));
    }
    let y: Vec<f64> = data.labels.iter().map(|l| l.signed()).collect();
    let sol = smo::solve(&data.features, &y, kernel, c, config)?;

    let sv: Vec<usize> = (0..sol.alpha.len())
        .filter(|&i| sol.alpha[i] > 0.0)
        .collect();
    let model = SvmModel {
        support_vectors: data.features.select_rows(&sv),
        dual_coefs: sv.iter().map(|&i| y[i] * sol.alpha[i]).collect(),
        bias: sol.bias,
        kernel,
        c,
        diagnostics: TrainingDiagnostics {
            iterations: sol.iterations,
            max_kkt_violation: sol.max_kkt_violation,
            objective: sol.objective,
        },
    };
    Ok(SvmFit {
        model,
        alpha: sol.alpha,
    })
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.cols()
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self
            .support_vectors
            .row_iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| coef * self.kernel.apply(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Direction> {
        self.decision_value(x).map(Direction::from_sign)
    }

    pub fn predict_batch(&self, rows: &Matrix) -> Result<Vec<Direction>> {
        rows.row_iter().map(|r| self.predict(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Direction::{Down, Up};

    fn set(rows: &[&[f64]], labels: &[Direction]) -> TrainingSet {
        TrainingSet::new(Matrix::from_rows(rows).unwrap(), labels.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_separable_pair() {
        let data = set(&[&[0.0], &[2.0]], &[Down, Up]);
        let m = train(&data, Kernel::Linear, 100.0).unwrap();
        // w = 1, b = -1: boundary at 1
        assert!(m.decision_value(&[1.0]).unwrap().abs() < 1e-8);
        assert_eq!(m.predict(&[0.5]).unwrap(), Down);
        assert_eq!(m.predict(&[1.5]).unwrap(), Up);
        assert!((m.decision_value(&[2.0]).unwrap() - 1.0).abs() < 1e-3);
        assert!(m.dual_coefs.iter().sum::<f64>().abs() < 1e-8);
    }

    #[test]
    fn xor_with_rbf() {
        let data = set(
            &[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]],
            &[Down, Down, Up, Up],
        );
        let m = train(&data, Kernel::rbf(1.0).unwrap(), 100.0).unwrap();
        let pred = m.predict_batch(data.features()).unwrap();
        assert_eq!(pred, data.labels());
    }

    #[test]
    fn decision_value_is_kernel_expansion() {
        let m = SvmModel {
            support_vectors: Matrix::from_rows(&[[0.0, 1.0], [2.0, -1.0]]).unwrap(),
            dual_coefs: vec![0.5, -0.5],
            bias: 0.25,
            kernel: Kernel::Rbf { gamma: 0.5 },
            c: 1.0,
            diagnostics: TrainingDiagnostics {
                iterations: 0,
                max_kkt_violation: 0.0,
                objective: 0.0,
            },
        };
        let x = [1.0, 0.0];
        // |x - sv0|² = 2, |x - sv1|² = 2
        let expect = 0.5 * (-1.0f64).exp() - 0.5 * (-1.0f64).exp() + 0.25;
        assert!((m.decision_value(&x).unwrap() - expect).abs() < 1e-15);
        let y = [0.0, 0.0];
        let expect = 0.5 * (-0.5f64).exp() - 0.5 * (-2.5f64).exp() + 0.25;
        assert!((m.decision_value(&y).unwrap() - expect).abs() < 1e-15);
        assert!(m.decision_value(&[1.0]).is_err());
    }

    #[test]
    fn zero_decision_predicts_up() {
        let m = SvmModel {
            support_vectors: Matrix::from_rows(&[[1.0]]).unwrap(),
            dual_coefs: vec![0.0],
            bias: 0.0,
            kernel: Kernel::Linear,
            c: 1.0,
            diagnostics: TrainingDiagnostics {
                iterations: 0,
                max_kkt_violation: 0.0,
                objective: 0.0,
            },
        };
        assert_eq!(m.predict(&[3.0]).unwrap(), Up);
        let m = SvmModel { bias: 0.1, ..m };
        assert_eq!(m.predict(&[3.0]).unwrap(), Up);
    }

    #[test]
    fn training_errors() {
        let one_class = set(&[&[0.0], &[1.0]], &[Up, Up]);
        assert!(matches!(
            train(&one_class, Kernel::Linear, 1.0),
            Err(Error::DegenerateTraining(_))
        ));
        let data = set(&[&[0.0], &[1.0]], &[Up, Down]);
        assert!(matches!(
            train(&data, Kernel::Linear, 0.0),
            Err(Error::Validation(_))
        ));
        assert!(
            TrainingSet::new(Matrix::from_rows(&[[f64::INFINITY]]).unwrap(), vec![Up]).is_err()
        );
        assert!(TrainingSet::new(Matrix::zeros(2, 1), vec![Up]).is_err());
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let data = set(
            &[
                &[0.0, 0.0],
                &[1.0, 1.0],
                &[0.0, 1.0],
                &[1.0, 0.0],
                &[0.5, 0.2],
            ],
            &[Down, Down, Up, Up, Down],
        );
        let config = SmoConfig {
            max_passes: Some(0),
            ..SmoConfig::default()
        };
        assert!(matches!(
            train_with(&data, Kernel::rbf(1.0).unwrap(), 100.0, &config),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn on_demand_gram_matches_full() {
        let data = set(
            &[
                &[0.0, 0.3],
                &[1.0, 1.0],
                &[0.2, 1.0],
                &[1.0, 0.1],
                &[0.5, 0.6],
            ],
            &[Down, Down, Up, Up, Down],
        );
        let k = Kernel::rbf(2.0).unwrap();
        let full = train_with(&data, k, 10.0, &SmoConfig::default()).unwrap();
        let lazy = train_with(
            &data,
            k,
            10.0,
            &SmoConfig {
                full_gram_limit: 0,
                ..SmoConfig::default()
            },
        )
        .unwrap();
        assert_eq!(full.alpha, lazy.alpha);
        assert_eq!(full.model.bias, lazy.model.bias);
    }
}
