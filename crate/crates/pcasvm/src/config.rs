//! Experiment config loading, `key=value` overrides and source ingestion.

use std::path::{Path, PathBuf};

use pcasvm_core::backtest::ExperimentConfig;
use pcasvm_core::timeseries::{align_panel, AlignedPanel, PriceSeries};
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::read_price_file;

/// A dotted config path and its replacement value.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl std::str::FromStr for Override {
    type Err = Error;

    /// `svm.C=100`. The value is read as JSON when it parses as JSON and as
    /// a plain string otherwise.
    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("override `{s}` is not of the form key=value")))?;
        let path: Vec<String> = key.trim().split('.').map(str::to_owned).collect();
        if path.iter().any(String::is_empty) {
            return Err(Error::Usage(format!(
                "override `{s}` has an empty key segment"
            )));
        }
        let value = serde_json::from_str(raw.trim())
            .unwrap_or_else(|_| Value::String(raw.trim().to_owned()));
        Ok(Override { path, value })
    }
}

fn lookup<'a>(value: &'a Value, path: &[String]) -> Option<&'a Value> {
    path.iter()
        .try_fold(value, |v, key| v.as_object()?.get(key))
}

/// Applies overrides in order, so the last one for a key wins.
pub fn apply_overrides(doc: &mut Value, overrides: &[Override]) -> Result<()> {
    for o in overrides {
        let mut node = &mut *doc;
        for key in &o.path[..o.path.len() - 1] {
            let map = node.as_object_mut().ok_or_else(|| {
                Error::Usage(format!(
                    "override `{}` descends into a non-object",
                    o.path.join(".")
                ))
            })?;
            node = map
                .entry(key.clone())
                .or_insert_with(|| Value::Object(Default::default()));
        }
        let map = node.as_object_mut().ok_or_else(|| {
            Error::Usage(format!(
                "override `{}` descends into a non-object",
                o.path.join(".")
            ))
        })?;
        map.insert(o.path[o.path.len() - 1].clone(), o.value.clone());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// Source paths in the config are relative to this directory.
    pub base_dir: PathBuf,
}

pub fn parse_config(text: &str, path: &Path, overrides: &[Override]) -> Result<ExperimentConfig> {
    let json_err = |source| Error::Json {
        path: path.to_owned(),
        source,
    };
    let mut doc: Value = serde_json::from_str(text).map_err(json_err)?;
    apply_overrides(&mut doc, overrides)?;
    let config: ExperimentConfig = serde_json::from_value(doc).map_err(json_err)?;

    // serde ignores unknown fields, so a misspelt key would vanish silently
    let echo = serde_json::to_value(&config).map_err(json_err)?;
    for o in overrides {
        if lookup(&echo, &o.path).is_none() {
            return Err(Error::Usage(format!(
                "unknown config key `{}`",
                o.path.join(".")
            )));
        }
    }
    config.validate().map_err(|e| Error::data(path, e))?;
    Ok(config)
}

pub fn load_config(path: &Path, overrides: &[Override]) -> Result<LoadedConfig> {
    if !path.is_file() {
        return Err(Error::Usage(format!(
            "config file {} does not exist",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config = parse_config(&text, path, overrides)?;
    let base_dir = path.parent().map(Path::to_owned).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}

impl LoadedConfig {
    /// Reads every listed source (in parallel) and aligns them on the
    /// reference calendar.
    pub fn load_panel(&self) -> Result<AlignedPanel> {
        let panel = &self.config.panel;
        if panel.sources.is_empty() {
            return Err(Error::Format(
                "config lists no panel sources; add panel.sources or pass --panel".into(),
            ));
        }
        let series = panel
            .sources
            .par_iter()
            .map(|s| {
                read_price_file(
                    &self.base_dir.join(&s.path),
                    Some(&s.id),
                    panel.date_format.as_deref(),
                )
            })
            .collect::<Result<Vec<PriceSeries>>>()?;
        log::debug!("event=sources_read count={}", series.len());
        Ok(align_panel(&series, &panel.reference, panel.range())?)
    }

    /// The aligned panel from `panel_file` when given, else from the sources.
    pub fn panel(&self, panel_file: Option<&Path>) -> Result<AlignedPanel> {
        let panel = match panel_file {
            Some(p) => crate::io::read_panel_file(p)?,
            None => self.load_panel()?,
        };
        self.config.validate_for(&panel)?;
        Ok(panel)
    }
}
