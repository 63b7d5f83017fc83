use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, squared_distance};
use crate::{Error, Result};

/// Kernel function `K(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    /// `x·y`
    Linear,
    /// `(x·y + coef0)^degree`
    Polynomial { degree: u32, coef0: f64 },
    /// `exp(-gamma |x - y|²)`
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn polynomial(degree: u32, coef0: f64) -> Result<Self> {
        let k = Kernel::Polynomial { degree, coef0 };
        k.validate()?;
        Ok(k)
    }

    pub fn rbf(gamma: f64) -> Result<Self> {
        let k = Kernel::Rbf { gamma };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Polynomial { degree, coef0 } => {
                if degree == 0 || !coef0.is_finite() {
                    Err(Error::validation(format!(
                        "polynomial kernel needs degree >= 1 and finite coef0 (got {degree}, {coef0})"
                    )))
                } else {
                    Ok(())
                }
            }
            Kernel::Rbf { gamma } => {
                if gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::validation(format!(
                        "rbf kernel needs gamma > 0, got {gamma}"
                    )))
                }
            }
        }
    }

    /// Kernel value without the dimension check.
    #[inline]
    pub fn apply(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(x, y),
            Kernel::Polynomial { degree, coef0 } => (dot(x, y) + coef0).powi(degree as i32),
            Kernel::Rbf { gamma } => (-gamma * squared_distance(x, y)).exp(),
        }
    }
}

pub fn kernel_eval(kernel: &Kernel, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "kernel arguments have dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(kernel.apply(x, y))
}
