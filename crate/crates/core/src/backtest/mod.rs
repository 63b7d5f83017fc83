//! Rolling-window evaluation of the compared forecasters.
//!
//! [`run_backtest`] walks the windows sequentially. Callers that want
//! parallelism can drive [`run_window`] themselves over
//! [`build_windows`]'s output and hand the ordered results to
//! [`finish_report`].

mod config;
mod features;
mod report;
mod windows;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    AnnSettings, ExperimentConfig, FactorIds, KernelKind, Lags, ModelKind, PanelSources,
    PcaSettings, Seeds, Source, SvmSettings, WindowSettings, CONFIG_SCHEMA_VERSION,
};
pub use features::{assemble_features, AssembledWindow, PanelFeatures, Variant};
pub use report::{summarize, RenderedReport};
pub use windows::{build_windows, WindowScheme, WindowSpec};

use crate::baselines::{random_walk_predict, train_mlp, MlpModel};
use crate::svm::{train_with, SvmModel};
use crate::timeseries::{AlignedPanel, DateRange, Direction};
use crate::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Percentage of matching directions.
pub fn hit_ratio(predictions: &[Direction], labels: &[Direction]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::domain(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::domain("hit ratio of an empty sequence"));
    }
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(100.0 * hits as f64 / predictions.len() as f64)
}

/// Mean and sample standard deviation (`n − 1` divisor; 0 when `n = 1`).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub iteration: usize,
    pub train: DateRange,
    pub test: DateRange,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Principal components kept in this window, when a PCA model ran.
    pub selected_m: Option<usize>,
    /// Hit ratio (percent) per model, in the report's model order.
    pub hit_ratios: Vec<f64>,
}

/// Fitted model of one window, kept for export.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Svm(SvmModel),
    Mlp(MlpModel),
    RandomWalk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutcome {
    pub result: IterationResult,
    pub models: Vec<(ModelKind, TrainedModel)>,
    /// Test-row predictions per model.
    pub predictions: Vec<Vec<Direction>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// SHA-256 of the serialized config.
    pub config_digest: String,
    /// SHA-256 of the aligned panel (ids, dates, prices).
    pub data_digest: String,
    #[serde(rename = "svm_C")]
    pub svm_c: f64,
    pub svm_kernel: KernelKind,
    pub svm_gamma: Option<f64>,
    pub pca_threshold: f64,
    pub std_divisor: String,
    /// Set when only one iteration ran and the std row is a placeholder 0.
    pub single_iteration: bool,
    /// Wall-clock stamp added by the caller; not part of the reproducible body.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub schema_version: u32,
    pub target: String,
    pub models: Vec<ModelKind>,
    pub iterations: Vec<IterationResult>,
    pub summary: Vec<ModelSummary>,
    pub metadata: ReportMetadata,
}

fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

pub fn config_digest(config: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(config).map_err(|e| Error::Internal(format!("{e}")))?;
    Ok(sha256_hex(bytes))
}

pub fn panel_digest(panel: &AlignedPanel) -> String {
    let mut h = Sha256::new();
    for id in panel.instruments() {
        h.update(id.as_bytes());
        h.update([0u8]);
    }
    for d in panel.calendar() {
        h.update(format!("{d}").as_bytes());
    }
    for v in panel.values().as_slice() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Trains and scores every configured model on one window.
pub fn run_window(
    frame: &PanelFeatures,
    config: &ExperimentConfig,
    window: &WindowSpec,
) -> Result<WindowOutcome> {
    run_window_inner(frame, config, window).map_err(|e| e.in_iteration(window.iteration))
}

fn run_window_inner(
    frame: &PanelFeatures,
    config: &ExperimentConfig,
    window: &WindowSpec,
) -> Result<WindowOutcome> {
    let needs = |pca: bool| {
        config
            .models
            .iter()
            .any(|m| *m != ModelKind::RandomWalk && m.uses_pca() == pca)
    };
    let with_pca = if needs(true) {
        Some(frame.assemble(config, window, Variant::Pca)?)
    } else {
        None
    };
    let raw = if needs(false) || with_pca.is_none() {
        Some(frame.assemble(config, window, Variant::Raw)?)
    } else {
        None
    };
    // both variants share rows and labels
    let rows = with_pca
        .as_ref()
        .or(raw.as_ref())
        .expect("at least one variant");
    let test_labels = rows.test.labels();

    let mut hit_ratios = Vec::with_capacity(config.models.len());
    let mut models = Vec::with_capacity(config.models.len());
    let mut predictions = Vec::with_capacity(config.models.len());
    for &kind in &config.models {
        let set = if kind.uses_pca() { &with_pca } else { &raw };
        let (trained, predicted) = match kind {
            ModelKind::PcaSvm | ModelKind::Svm => {
                let w = set.as_ref().expect("variant assembled");
                let kernel = config.svm.kernel_for(w.train.dim())?;
                let fit = train_with(&w.train, kernel, config.svm.c, &config.svm.smo())?;
                let p = fit.model.predict_batch(w.test.features())?;
                (TrainedModel::Svm(fit.model), p)
            }
            ModelKind::PcaAnn | ModelKind::Ann => {
                let w = set.as_ref().expect("variant assembled");
                let model = train_mlp(&w.train, config.mlp_config(window.iteration))?;
                let p = model.predict_batch(w.test.features())?;
                (TrainedModel::Mlp(model), p)
            }
            ModelKind::RandomWalk => {
                let labels = frame.labels();
                let p = rows
                    .test_rows
                    .iter()
                    .map(|&j| random_walk_predict(&labels[..j]))
                    .collect::<Result<Vec<_>>>()?;
                (TrainedModel::RandomWalk, p)
            }
        };
        hit_ratios.push(hit_ratio(&predicted, test_labels)?);
        models.push((kind, trained));
        predictions.push(predicted);
    }

    Ok(WindowOutcome {
        result: IterationResult {
            iteration: window.iteration,
            train: window.train,
            test: window.test,
            train_rows: rows.train_rows.len(),
            test_rows: rows.test_rows.len(),
            selected_m: with_pca.as_ref().and_then(|w| w.selected_m),
            hit_ratios,
        },
        models,
        predictions,
    })
}

/// Aggregates per-window results (sorted by iteration) into a report.
pub fn finish_report(
    config: &ExperimentConfig,
    panel: &AlignedPanel,
    mut iterations: Vec<IterationResult>,
) -> Result<BacktestReport> {
    if iterations.is_empty() {
        return Err(Error::domain("backtest produced no iterations"));
    }
    iterations.sort_by_key(|r| r.iteration);
    let summary = config
        .models
        .iter()
        .enumerate()
        .map(|(k, &model)| {
            let values: Vec<f64> = iterations.iter().map(|r| r.hit_ratios[k]).collect();
            let (mean, std) = mean_and_std(&values);
            ModelSummary { model, mean, std }
        })
        .collect();
    Ok(BacktestReport {
        schema_version: REPORT_SCHEMA_VERSION,
        target: config.target.clone(),
        models: config.models.clone(),
        summary,
        metadata: ReportMetadata {
            config_digest: config_digest(config)?,
            data_digest: panel_digest(panel),
            svm_c: config.svm.c,
            svm_kernel: config.svm.kernel,
            svm_gamma: config.svm.gamma,
            pca_threshold: config.pca.threshold,
            std_divisor: "n-1".into(),
            single_iteration: iterations.len() == 1,
            generated_at: None,
        },
        iterations,
    })
}

/// Runs every window in order. The first failing window aborts the run.
pub fn run_backtest(config: &ExperimentConfig, panel: &AlignedPanel) -> Result<BacktestReport> {
    let frame = PanelFeatures::new(panel, config)?;
    let windows = build_windows(config.windows.first_year, &config.windows.scheme)?;
    let results = windows
        .iter()
        .map(|w| run_window(&frame, config, w).map(|o| o.result))
        .collect::<Result<Vec<_>>>()?;
    finish_report(config, panel, results)
}
