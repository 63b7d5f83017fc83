//! Benchmark predictors: direction persistence and a small neural network.

mod mlp;

pub use mlp::{train_mlp, Gradient, MlpConfig, MlpModel};

use crate::timeseries::Direction;
use crate::{Error, Result};

/// Random-walk benchmark: tomorrow repeats the most recently observed
/// direction.
pub fn random_walk_predict(history: &[Direction]) -> Result<Direction> {
    history
        .last()
        .copied()
        .ok_or_else(|| Error::domain("random walk needs at least one past direction"))
}
