//! Per-day feature rows: lagged factor RDPs followed by either principal
//! component scores or the raw RDP-1 returns of the constituents.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;

use super::config::ExperimentConfig;
use super::windows::WindowSpec;
use crate::linalg::Matrix;
use crate::pca::{contribution, fit_pca_with, select_components, ContributionReport, PcaModel};
use crate::svm::TrainingSet;
use crate::timeseries::{direction_labels, rdp, AlignedPanel, DateRange, Direction};
use crate::{Error, Result};

/// RDP values of one column indexed by panel row.
#[derive(Debug, Clone, PartialEq)]
struct LaggedColumn {
    lag: usize,
    values: Vec<f64>,
}

impl LaggedColumn {
    #[inline]
    fn at(&self, row: usize) -> f64 {
        self.values[row - self.lag]
    }
}

/// Indicators computed once per panel and shared by every window.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelFeatures {
    calendar: Vec<NaiveDate>,
    factors: Vec<LaggedColumn>,
    constituent_ids: Vec<String>,
    constituent_lag: usize,
    /// Row `j - constituent_lag` holds the constituents' RDP at panel row `j`.
    constituents: Matrix,
    labels: Vec<Direction>,
    first_usable: usize,
}

/// How the constituents enter the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// First `m` principal component scores, PCA fitted on training rows.
    Pca,
    /// Raw RDP values of every constituent.
    Raw,
}

/// Train and test sets of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledWindow {
    pub train: TrainingSet,
    pub test: TrainingSet,
    /// Panel row of each training example.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    /// PCA fitted on the training rows, for [`Variant::Pca`].
    pub pca: Option<PcaModel>,
    pub contribution: Option<ContributionReport>,
    pub selected_m: Option<usize>,
}

impl PanelFeatures {
    pub fn new(panel: &AlignedPanel, config: &ExperimentConfig) -> Result<Self> {
        config.validate_for(panel)?;
        let factors = config
            .factor_lags()
            .iter()
            .map(|&(id, lag)| {
                Ok(LaggedColumn {
                    lag,
                    values: rdp(&panel.column(id)?, lag)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let constituent_ids = config.resolve_constituents(panel);
        let lag = config.lags.constituent;
        let columns = constituent_ids
            .iter()
            .map(|id| rdp(&panel.column(id)?, lag))
            .collect::<Result<Vec<_>>>()?;
        let rows = panel.len() - lag;
        let mut constituents = Matrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                constituents[(r, c)] = *v;
            }
        }

        let labels = direction_labels(&panel.column(&config.target)?)?;
        let first_usable = factors
            .iter()
            .map(|f| f.lag)
            .chain([lag])
            .max()
            .unwrap_or(0);
        Ok(Self {
            calendar: panel.calendar().to_vec(),
            factors,
            constituent_ids,
            constituent_lag: lag,
            constituents,
            labels,
            first_usable,
        })
    }

    pub fn constituent_ids(&self) -> &[String] {
        &self.constituent_ids
    }

    /// Target direction labels; `labels()[j]` is the move from row `j` to `j + 1`.
    pub fn labels(&self) -> &[Direction] {
        &self.labels
    }

    pub fn calendar(&self) -> &[NaiveDate] {
        &self.calendar
    }

    /// Earliest panel date with every lagged value defined.
    pub fn first_usable_date(&self) -> Option<NaiveDate> {
        self.calendar.get(self.first_usable).copied()
    }

    /// Panel rows in `range` with full lag history and a next-day label.
    pub fn rows_in(&self, range: DateRange) -> Vec<usize> {
        (self.first_usable..self.labels.len())
            .filter(|&j| range.contains(self.calendar[j]))
            .collect()
    }

    /// Constituent RDP rows for the given panel rows.
    pub fn constituent_matrix(&self, rows: &[usize]) -> Matrix {
        let shifted: Vec<usize> = rows.iter().map(|r| r - self.constituent_lag).collect();
        self.constituents.select_rows(&shifted)
    }

    /// Constituent RDP over every row where it is defined.
    pub fn all_constituent_returns(&self) -> &Matrix {
        &self.constituents
    }

    fn factor_row(&self, row: usize, out: &mut Vec<f64>) {
        out.extend(self.factors.iter().map(|f| f.at(row)));
    }

    fn rows_or_error(&self, range: DateRange, what: &str) -> Result<Vec<usize>> {
        let rows = self.rows_in(range);
        if rows.is_empty() {
            return Err(Error::WindowAssembly {
                reason: format!(
                    "no {what} rows with full lag history and a next-day label in [{}, {})",
                    range.start, range.end
                ),
                first_usable: self.first_usable_date(),
            });
        }
        Ok(rows)
    }

    fn build_set(&self, rows: &[usize], constituent_part: &Matrix) -> Result<TrainingSet> {
        let dim = self.factors.len() + constituent_part.cols();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, &row) in rows.iter().enumerate() {
            self.factor_row(row, &mut data);
            data.extend_from_slice(constituent_part.row(i));
        }
        TrainingSet::new(
            Matrix::from_vec(rows.len(), dim, data)?,
            rows.iter().map(|&r| self.labels[r]).collect(),
        )
    }

    /// Builds the train and test sets for `window`.
    ///
    /// For [`Variant::Pca`] the PCA is fitted on the training rows only and
    /// test rows are projected through that frozen model.
    pub fn assemble(
        &self,
        config: &ExperimentConfig,
        window: &WindowSpec,
        variant: Variant,
    ) -> Result<AssembledWindow> {
        let train_rows = self.rows_or_error(window.train, "training")?;
        let test_rows = self.rows_or_error(window.test, "test")?;
        let train_c = self.constituent_matrix(&train_rows);
        let test_c = self.constituent_matrix(&test_rows);

        let (train_part, test_part, pca, report, m) = match variant {
            Variant::Raw => (train_c, test_c, None, None, None),
            Variant::Pca => {
                if train_rows.len() < 2 {
                    return Err(Error::WindowAssembly {
                        reason: "PCA needs at least two training rows".into(),
                        first_usable: self.first_usable_date(),
                    });
                }
                let model = fit_pca_with(&train_c, config.pca.options())?;
                let report = contribution(&model)?;
                let m = config
                    .pca
                    .components
                    .unwrap_or_else(|| select_components(&report, config.pca.threshold))
                    .min(model.n_inputs);
                let train_scores = model.project(&train_c, m)?;
                let test_scores = model.project(&test_c, m)?;
                let report = ContributionReport {
                    selected_m: Some(m),
                    ..report
                };
                (
                    train_scores,
                    test_scores,
                    Some(model),
                    Some(report),
                    Some(m),
                )
            }
        };

        Ok(AssembledWindow {
            train: self.build_set(&train_rows, &train_part)?,
            test: self.build_set(&test_rows, &test_part)?,
            train_rows,
            test_rows,
            pca,
            contribution: report,
            selected_m: m,
        })
    }
}

/// PCA-variant train/test sets for one window.
pub fn assemble_features(
    panel: &AlignedPanel,
    config: &ExperimentConfig,
    window: &WindowSpec,
) -> Result<(TrainingSet, TrainingSet)> {
    let frame = PanelFeatures::new(panel, config)?;
    let w = frame.assemble(config, window, Variant::Pca)?;
    Ok((w.train, w.test))
}
