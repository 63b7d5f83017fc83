//! Backtest driver running windows on the rayon pool.

use pcasvm_core::backtest::{
    build_windows, finish_report, run_window, BacktestReport, ExperimentConfig, ModelKind,
    PanelFeatures, TrainedModel, Variant, WindowOutcome, WindowSpec,
};
use pcasvm_core::timeseries::AlignedPanel;
use rayon::prelude::*;

use crate::error::Result;
use crate::formats::{ModelDocument, Projection, StoredModel};

pub struct RunOutput {
    pub report: BacktestReport,
    /// File name and document of every fitted classifier, when requested.
    pub models: Vec<(String, ModelDocument)>,
}

/// Short id used in file names, e.g. `pca-svm`.
pub fn model_slug(kind: ModelKind) -> String {
    match serde_json::to_value(kind) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("model kinds serialize as strings"),
    }
}

fn documents(
    frame: &PanelFeatures,
    config: &ExperimentConfig,
    window: &WindowSpec,
    outcome: WindowOutcome,
) -> Result<Vec<(String, ModelDocument)>> {
    let projection = if config.models.iter().any(|m| m.uses_pca()) {
        // same inputs as run_window, so the same fit
        let w = frame.assemble(config, window, Variant::Pca)?;
        w.pca
            .zip(w.selected_m)
            .map(|(pca, components)| Projection { pca, components })
    } else {
        None
    };
    let mut out = Vec::new();
    for (kind, trained) in outcome.models {
        let model = match trained {
            TrainedModel::Svm(m) => StoredModel::Svm(m),
            TrainedModel::Mlp(m) => StoredModel::Mlp(m),
            TrainedModel::RandomWalk => continue,
        };
        let name = format!("iter{:02}-{}.json", window.iteration, model_slug(kind));
        let proj = if kind.uses_pca() {
            projection.clone()
        } else {
            None
        };
        out.push((
            name,
            ModelDocument::new(kind, Some(window.iteration), proj, model),
        ));
    }
    Ok(out)
}

/// Same report as `run_backtest`, with windows trained concurrently. When
/// several windows fail, the earliest iteration's error is returned.
pub fn run_parallel(
    config: &ExperimentConfig,
    panel: &AlignedPanel,
    export_models: bool,
) -> Result<RunOutput> {
    let frame = PanelFeatures::new(panel, config)?;
    let windows = build_windows(config.windows.first_year, &config.windows.scheme)?;
    log::info!(
        "event=backtest_start windows={} models={} threads={}",
        windows.len(),
        config.models.len(),
        rayon::current_num_threads()
    );
    let outcomes: Vec<Result<_>> = windows
        .par_iter()
        .map(|w| {
            let outcome = run_window(&frame, config, w)?;
            let r = &outcome.result;
            log::info!(
                "event=window iteration={} train_rows={} test_rows={} m={} hit_ratios={:?}",
                r.iteration,
                r.train_rows,
                r.test_rows,
                r.selected_m.map_or_else(|| "-".into(), |m| m.to_string()),
                r.hit_ratios
            );
            let result = outcome.result.clone();
            let docs = if export_models {
                documents(&frame, config, w, outcome)?
            } else {
                Vec::new()
            };
            Ok((result, docs))
        })
        .collect();

    let mut results = Vec::with_capacity(outcomes.len());
    let mut models = Vec::new();
    for o in outcomes {
        let (r, docs) = o?;
        results.push(r);
        models.extend(docs);
    }
    let report = finish_report(config, panel, results)?;
    Ok(RunOutput { report, models })
}
