use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::windows::WindowScheme;
use crate::baselines::MlpConfig;
use crate::pca::{PcaOptions, DEFAULT_THRESHOLD};
use crate::svm::{default_gamma, Kernel, SmoConfig, DEFAULT_C};
use crate::timeseries::{AlignedPanel, DateRange};
use crate::{Error, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// The five compared forecasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "pca-svm")]
    PcaSvm,
    #[serde(rename = "svm")]
    Svm,
    #[serde(rename = "pca-ann")]
    PcaAnn,
    #[serde(rename = "ann")]
    Ann,
    #[serde(rename = "rw")]
    RandomWalk,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::PcaSvm,
        ModelKind::Svm,
        ModelKind::PcaAnn,
        ModelKind::Ann,
        ModelKind::RandomWalk,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::PcaSvm => "PCA-SVM",
            ModelKind::Svm => "SVM",
            ModelKind::PcaAnn => "PCA-ANN",
            ModelKind::Ann => "ANN",
            ModelKind::RandomWalk => "RW",
        }
    }

    pub fn uses_pca(self) -> bool {
        matches!(self, ModelKind::PcaSvm | ModelKind::PcaAnn)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub id: String,
    /// Path of a `date,close` CSV, relative to the config file.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelSources {
    /// Instrument whose trading days define the calendar.
    pub reference: String,
    #[serde(default)]
    pub start: Option<NaiveDate>,
    #[serde(default)]
    pub end: Option<NaiveDate>,
    /// chrono format string for non-ISO input dates.
    #[serde(default)]
    pub date_format: Option<String>,
    #[serde(default)]
    pub sources: Vec<Source>,
}

impl PanelSources {
    pub fn range(&self) -> DateRange {
        DateRange::new(
            self.start.unwrap_or(NaiveDate::MIN),
            self.end.unwrap_or(NaiveDate::MAX),
        )
    }
}

/// External factor series entering every feature row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorIds {
    pub index: String,
    pub sp500: String,
    pub exr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lags {
    pub index: usize,
    pub factor: usize,
    pub constituent: usize,
}

impl Default for Lags {
    fn default() -> Self {
        Self {
            index: 3,
            factor: 3,
            constituent: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcaSettings {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub correlation: bool,
    /// Fixed component count, overriding the threshold rule.
    #[serde(default)]
    pub components: Option<usize>,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

impl Default for PcaSettings {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            correlation: false,
            components: None,
        }
    }
}

impl PcaSettings {
    pub fn options(&self) -> PcaOptions {
        PcaOptions {
            correlation: self.correlation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmSettings {
    #[serde(default = "default_kernel")]
    pub kernel: KernelKind,
    /// RBF width; `1 / feature_dim` when absent.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default)]
    pub coef0: f64,
    #[serde(rename = "C", default = "default_c")]
    pub c: f64,
    #[serde(default = "default_kkt_tolerance")]
    pub kkt_tolerance: f64,
}

fn default_kernel() -> KernelKind {
    KernelKind::Rbf
}
fn default_degree() -> u32 {
    3
}
fn default_c() -> f64 {
    DEFAULT_C
}
fn default_kkt_tolerance() -> f64 {
    SmoConfig::default().kkt_tolerance
}

impl Default for SvmSettings {
    fn default() -> Self {
        Self {
            kernel: default_kernel(),
            gamma: None,
            degree: default_degree(),
            coef0: 0.0,
            c: DEFAULT_C,
            kkt_tolerance: default_kkt_tolerance(),
        }
    }
}

impl SvmSettings {
    /// Concrete kernel for `dim`-dimensional features.
    pub fn kernel_for(&self, dim: usize) -> Result<Kernel> {
        let k = match self.kernel {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Polynomial => Kernel::Polynomial {
                degree: self.degree,
                coef0: self.coef0,
            },
            KernelKind::Rbf => Kernel::Rbf {
                gamma: self.gamma.unwrap_or_else(|| default_gamma(dim)),
            },
        };
        k.validate()?;
        Ok(k)
    }

    pub fn smo(&self) -> SmoConfig {
        SmoConfig {
            kkt_tolerance: self.kkt_tolerance,
            ..SmoConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnSettings {
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_hidden() -> usize {
    MlpConfig::default().hidden
}
fn default_learning_rate() -> f64 {
    MlpConfig::default().learning_rate
}
fn default_epochs() -> usize {
    MlpConfig::default().epochs
}

impl Default for AnnSettings {
    fn default() -> Self {
        Self {
            hidden: default_hidden(),
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    /// Base seed for network initialization; window `i` uses `ann + i`.
    #[serde(default)]
    pub ann: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSettings {
    #[serde(default = "default_first_year")]
    pub first_year: i32,
    #[serde(flatten)]
    pub scheme: WindowScheme,
}

fn default_first_year() -> i32 {
    2002
}

impl Default for WindowSettings {
    fn default() -> Self {
        Self {
            first_year: default_first_year(),
            scheme: WindowScheme::default(),
        }
    }
}

fn default_schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn default_models() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}

/// Everything a backtest run needs besides the price data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub panel: PanelSources,
    /// Instrument whose next-day direction is forecast.
    pub target: String,
    pub factors: FactorIds,
    /// PCA input instruments; all non-factor instruments when absent. The
    /// target is always excluded.
    #[serde(default)]
    pub constituents: Option<Vec<String>>,
    #[serde(default)]
    pub lags: Lags,
    #[serde(default)]
    pub pca: PcaSettings,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default)]
    pub svm: SvmSettings,
    #[serde(default)]
    pub ann: AnnSettings,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub windows: WindowSettings,
}

impl ExperimentConfig {
    /// Config with every knob at its default.
    pub fn new(reference: &str, target: &str, index: &str, sp500: &str, exr: &str) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            panel: PanelSources {
                reference: reference.into(),
                start: None,
                end: None,
                date_format: None,
                sources: vec![],
            },
            target: target.into(),
            factors: FactorIds {
                index: index.into(),
                sp500: sp500.into(),
                exr: exr.into(),
            },
            constituents: None,
            lags: Lags::default(),
            pca: PcaSettings::default(),
            models: default_models(),
            svm: SvmSettings::default(),
            ann: AnnSettings::default(),
            seeds: Seeds::default(),
            windows: WindowSettings::default(),
        }
    }

    /// Ordered `(instrument, lag)` pairs of the factor features.
    pub fn factor_lags(&self) -> [(&str, usize); 3] {
        [
            (self.factors.index.as_str(), self.lags.index),
            (self.factors.sp500.as_str(), self.lags.factor),
            (self.factors.exr.as_str(), self.lags.factor),
        ]
    }

    pub fn mlp_config(&self, iteration: usize) -> MlpConfig {
        MlpConfig {
            hidden: self.ann.hidden,
            learning_rate: self.ann.learning_rate,
            epochs: self.ann.epochs,
            seed: self.seeds.ann.wrapping_add(iteration as u64),
        }
    }

    /// Checks the settings that do not depend on data.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::validation(format!(
                "unsupported config schema version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.lags.index == 0 || self.lags.factor == 0 || self.lags.constituent == 0 {
            return Err(Error::validation("lags must be positive"));
        }
        if !(self.pca.threshold > 0.0 && self.pca.threshold <= 1.0) {
            return Err(Error::validation(format!(
                "PCA threshold must lie in (0, 1], got {}",
                self.pca.threshold
            )));
        }
        if self.pca.components == Some(0) {
            return Err(Error::validation("PCA component count must be positive"));
        }
        if self.models.is_empty() {
            return Err(Error::validation("no models requested"));
        }
        if !(self.svm.c > 0.0 && self.svm.c.is_finite()) {
            return Err(Error::validation(format!(
                "svm.C must be positive, got {}",
                self.svm.c
            )));
        }
        if !(self.svm.kkt_tolerance > 0.0) {
            return Err(Error::validation("svm.kkt_tolerance must be positive"));
        }
        // dimension is irrelevant for validation
        self.svm.kernel_for(1)?;
        if self.ann.hidden == 0 || self.ann.epochs == 0 || !(self.ann.learning_rate > 0.0) {
            return Err(Error::validation(
                "ann needs hidden >= 1, epochs >= 1 and a positive learning rate",
            ));
        }
        Ok(())
    }

    /// Checks the config against a concrete panel.
    pub fn validate_for(&self, panel: &AlignedPanel) -> Result<()> {
        self.validate()?;
        let need = |id: &str, what: &str| {
            panel
                .index_of(id)
                .map(|_| ())
                .ok_or_else(|| Error::validation(format!("{what} `{id}` is not in the panel")))
        };
        need(&self.target, "target")?;
        need(&self.factors.index, "index factor")?;
        need(&self.factors.sp500, "S&P 500 factor")?;
        need(&self.factors.exr, "exchange-rate factor")?;
        if let Some(list) = &self.constituents {
            for id in list {
                need(id, "constituent")?;
            }
        }
        if self.resolve_constituents(panel).is_empty() {
            return Err(Error::validation("no constituents left for PCA"));
        }
        Ok(())
    }

    /// PCA input instruments for `panel`, target excluded, in panel order
    /// unless listed explicitly.
    pub fn resolve_constituents(&self, panel: &AlignedPanel) -> Vec<String> {
        let factors = [&self.factors.index, &self.factors.sp500, &self.factors.exr];
        let candidates: Vec<String> = match &self.constituents {
            Some(list) => list.clone(),
            None => panel
                .instruments()
                .iter()
                .filter(|id| !factors.contains(id))
                .cloned()
                .collect(),
        };
        candidates
            .into_iter()
            .filter(|id| *id != self.target)
            .collect()
    }
}
