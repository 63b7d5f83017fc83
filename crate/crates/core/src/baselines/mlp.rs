use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::svm::TrainingSet;
use crate::timeseries::Direction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 10,
            learning_rate: 0.01,
            epochs: 2000,
            seed: 0,
        }
    }
}

/// `d → h → 1` network: tanh hidden layer, sigmoid output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// `h x d`
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub config: MlpConfig,
}

/// Loss gradient with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Gradient {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.w1.as_slice().to_vec();
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Largest double below 1.
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

impl MlpModel {
    /// Xavier-uniform weights from a seeded ChaCha stream, zero biases.
    pub fn init(input_dim: usize, config: MlpConfig) -> Result<Self> {
        if input_dim == 0 || config.hidden == 0 {
            return Err(Error::domain(
                "network needs at least one input and one hidden unit",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let h = config.hidden;
        let a1 = (6.0 / (input_dim + h) as f64).sqrt();
        let a2 = (6.0 / (h + 1) as f64).sqrt();
        let w1: Vec<f64> = (0..h * input_dim).map(|_| rng.gen_range(-a1..a1)).collect();
        let w2 = (0..h).map(|_| rng.gen_range(-a2..a2)).collect();
        Ok(Self {
            w1: Matrix::from_vec(h, input_dim, w1)?,
            b1: vec![0.0; h],
            w2,
            b2: 0.0,
            config,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.rows()
    }

    fn hidden_activations(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let z: f64 = self
                .w1
                .row(k)
                .iter()
                .zip(x)
                .map(|(w, v)| w * v)
                .sum::<f64>()
                + self.b1[k];
            *o = z.tanh();
        }
    }

    fn pre_output(&self, hidden: &[f64]) -> f64 {
        self.w2.iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>() + self.b2
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::domain(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Probability of an up move, strictly inside `(0, 1)`.
    pub fn output(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let mut a = vec![0.0; self.hidden()];
        self.hidden_activations(x, &mut a);
        Ok(sigmoid(self.pre_output(&a)).clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP))
    }

    /// Up when the output is at least one half.
    pub fn predict(&self, x: &[f64]) -> Result<Direction> {
        Ok(if self.output(x)? >= 0.5 {
            Direction::Up
        } else {
            Direction::Down
        })
    }

    pub fn predict_batch(&self, rows: &Matrix) -> Result<Vec<Direction>> {
        rows.row_iter().map(|r| self.predict(r)).collect()
    }

    /// Mean binary cross-entropy over `data`, with up as the positive class.
    pub fn loss(&self, data: &TrainingSet) -> Result<f64> {
        self.loss_and_gradient(data).map(|(l, _)| l)
    }

    /// Mean cross-entropy and its gradient by backpropagation.
    pub fn loss_and_gradient(&self, data: &TrainingSet) -> Result<(f64, Gradient)> {
        if data.dim() != self.input_dim() {
            return Err(Error::domain(format!(
                "training set has dimension {}, network expects {}",
                data.dim(),
                self.input_dim()
            )));
        }
        if data.is_empty() {
            return Err(Error::domain("empty training set"));
        }
        let h = self.hidden();
        let d = self.input_dim();
        let mut grad = Gradient {
            w1: Matrix::zeros(h, d),
            b1: vec![0.0; h],
            w2: vec![0.0; h],
            b2: 0.0,
        };
        let mut loss = 0.0;
        let mut a = vec![0.0; h];
        for (x, label) in data.features().row_iter().zip(data.labels()) {
            let target = if *label == Direction::Up { 1.0 } else { 0.0 };
            self.hidden_activations(x, &mut a);
            let z = self.pre_output(&a);
            loss += softplus(z) - target * z;
            let dz = sigmoid(z) - target;
            grad.b2 += dz;
            for k in 0..h {
                grad.w2[k] += dz * a[k];
                let dh = dz * self.w2[k] * (1.0 - a[k] * a[k]);
                grad.b1[k] += dh;
                for (g, v) in grad.w1.row_mut(k).iter_mut().zip(x) {
                    *g += dh * v;
                }
            }
        }
        let n = data.len() as f64;
        grad.w1 = Matrix::from_vec(h, d, grad.w1.as_slice().iter().map(|g| g / n).collect())?;
        grad.b1.iter_mut().for_each(|g| *g /= n);
        grad.w2.iter_mut().for_each(|g| *g /= n);
        grad.b2 /= n;
        Ok((loss / n, grad))
    }

    /// All parameters in `w1` (row-major), `b1`, `w2`, `b2` order.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = self.w1.as_slice().to_vec();
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    /// Copy of the network with parameters replaced (layout as
    /// [`MlpModel::parameters`]).
    pub fn with_parameters(&self, params: &[f64]) -> Result<Self> {
        let (h, d) = (self.hidden(), self.input_dim());
        if params.len() != h * d + 2 * h + 1 {
            return Err(Error::domain("parameter vector has the wrong length"));
        }
        let (w1, rest) = params.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        Ok(Self {
            w1: Matrix::from_vec(h, d, w1.to_vec())?,
            b1: b1.to_vec(),
            w2: w2.to_vec(),
            b2: b2[0],
            config: self.config,
        })
    }

    fn step(&mut self, grad: &Gradient, lr: f64) {
        let h = self.hidden();
        for k in 0..h {
            for (w, g) in self.w1.row_mut(k).iter_mut().zip(grad.w1.row(k)) {
                *w -= lr * g;
            }
            self.b1[k] -= lr * grad.b1[k];
            self.w2[k] -= lr * grad.w2[k];
        }
        self.b2 -= lr * grad.b2;
    }
}

/// Full-batch gradient descent on the mean cross-entropy.
pub fn train_mlp(data: &TrainingSet, config: MlpConfig) -> Result<MlpModel> {
    if config.epochs == 0 {
        return Err(Error::domain("training needs at least one epoch"));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::validation("learning rate must be positive"));
    }
    let mut model = MlpModel::init(data.dim(), config)?;
    for epoch in 0..config.epochs {
        let (loss, grad) = model.loss_and_gradient(data)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        model.step(&grad, config.learning_rate);
    }
    if !model.parameters().iter().all(|p| p.is_finite()) {
        return Err(Error::Divergence {
            epoch: config.epochs,
        });
    }
    Ok(model)
}
