//! Direction forecasting for market indices and individual stocks with a
//! PCA feature extractor feeding a kernel SVM classifier.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the pure numerical
//! pipeline:
//!
//! - [`timeseries`]: price series, calendar alignment, RDP indicators and
//!   direction labels.
//! - [`pca`]: covariance PCA on a cyclic Jacobi eigensolver, contribution
//!   rates, component selection, projection and biplot loadings.
//! - [`svm`]: soft-margin kernel SVM trained by sequential minimal
//!   optimization.
//! - [`baselines`]: random-walk (direction persistence) and a one-hidden-layer
//!   neural network.
//! - [`backtest`]: rolling train/test windows, feature assembly, hit ratios
//!   and report rendering.
//! - [`synthetic`]: seeded market generators with planted or null signal.
//!
//! File formats, configuration loading and the command-line tool live in the
//! `pcasvm` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod backtest;
pub mod baselines;
mod error;
pub mod linalg;
pub mod pca;
pub mod svm;
pub mod synthetic;
pub mod timeseries;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use timeseries::Direction;
