//! Seeded synthetic markets for demos and end-to-end checks.
//!
//! A market has an index, an S&P 500 stand-in, an exchange rate and two
//! blocks of constituents. Each block co-moves with its own common daily
//! factor (block A's factor has twice the volatility of block B's).
//! With [`Signal::Planted`] the index's next-day direction equals the sign of
//! today's block-A factor, so a classifier that sees the leading principal
//! component can recover it. With [`Signal::Null`] every series is an
//! independent random walk.
//!
//! The S&P 500 series skips a few reference days and the exchange rate trades
//! on some Saturdays, so alignment has work to do.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Datelike, Days, NaiveDate, Weekday};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::backtest::{ExperimentConfig, WindowScheme, WindowSettings};
use crate::timeseries::{align_panel, AlignedPanel, DateRange, Observation, PriceSeries};
use crate::{Error, Result};

pub const INDEX_ID: &str = "INDEX";
pub const SP500_ID: &str = "SP500";
pub const EXR_ID: &str = "EXR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signal {
    Planted,
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub first_year: i32,
    pub years: u32,
    pub block_a: usize,
    pub block_b: usize,
    pub signal: Signal,
}

impl Default for SyntheticSpec {
    /// Thirty instruments over 2002–2011.
    fn default() -> Self {
        Self {
            seed: 2002,
            first_year: 2002,
            years: 10,
            block_a: 14,
            block_b: 13,
            signal: Signal::Planted,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    pub spec: SyntheticSpec,
    pub series: Vec<PriceSeries>,
    pub block_a: Vec<String>,
    pub block_b: Vec<String>,
}

/// Daily factor volatilities in percent.
const FACTOR_A_SD: f64 = 2.0;
const FACTOR_B_SD: f64 = 1.0;
const IDIOSYNCRATIC_SD: f64 = 0.3;
const SP500_SD: f64 = 1.2;
const EXR_SD: f64 = 0.4;
const SP500_SKIP_PROB: f64 = 0.03;
const EXR_SATURDAY_PROB: f64 = 0.1;

fn compound(start: f64, returns: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut p = start;
    returns
        .into_iter()
        .map(|r| {
            p *= 1.0 + r / 100.0;
            p
        })
        .collect()
}

fn to_series(id: &str, dates: &[NaiveDate], prices: &[f64]) -> Result<PriceSeries> {
    PriceSeries::new(
        id,
        dates
            .iter()
            .zip(prices)
            .map(|(&date, &close)| Observation { date, close })
            .collect(),
    )
}

pub fn generate(spec: SyntheticSpec) -> Result<SyntheticMarket> {
    let start = NaiveDate::from_ymd_opt(spec.first_year, 1, 1)
        .ok_or_else(|| Error::domain(format!("bad first year {}", spec.first_year)))?;
    let end = NaiveDate::from_ymd_opt(spec.first_year + spec.years as i32, 1, 1)
        .ok_or_else(|| Error::domain("synthetic range out of bounds"))?;
    if spec.block_a + spec.block_b < 2 {
        return Err(Error::domain(
            "synthetic market needs at least two constituents",
        ));
    }

    let mut all_days = Vec::new();
    let mut d = start;
    while d < end {
        all_days.push(d);
        d = d + Days::new(1);
    }
    let calendar: Vec<NaiveDate> = all_days
        .iter()
        .copied()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect();
    let n = calendar.len();
    if n < 10 {
        return Err(Error::domain("synthetic range is too short"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let normal = |sd: f64, rng: &mut ChaCha8Rng| sd * unit.sample(rng);

    let fa: Vec<f64> = (0..n).map(|_| normal(FACTOR_A_SD, &mut rng)).collect();
    let fb: Vec<f64> = (0..n).map(|_| normal(FACTOR_B_SD, &mut rng)).collect();

    let index_returns: Vec<f64> = match spec.signal {
        Signal::Planted => (0..n)
            .map(|t| {
                let size = 0.2 + normal(0.5, &mut rng).abs();
                if t == 0 {
                    0.0
                } else if fa[t - 1] >= 0.0 {
                    size
                } else {
                    -size
                }
            })
            .collect(),
        Signal::Null => (0..n).map(|_| normal(1.0, &mut rng)).collect(),
    };

    let mut series = Vec::new();
    series.push(to_series(
        INDEX_ID,
        &calendar,
        &compound(1000.0, index_returns),
    )?);

    // the S&P stand-in starts a week early and misses some reference days
    let mut sp_dates = Vec::new();
    let mut lead = start - Days::new(7);
    while lead < start {
        if !matches!(lead.weekday(), Weekday::Sat | Weekday::Sun) {
            sp_dates.push(lead);
        }
        lead = lead + Days::new(1);
    }
    for &d in &calendar {
        if !rng.gen_bool(SP500_SKIP_PROB) {
            sp_dates.push(d);
        }
    }
    let sp_returns: Vec<f64> = (0..sp_dates.len())
        .map(|_| normal(SP500_SD, &mut rng))
        .collect();
    series.push(to_series(
        SP500_ID,
        &sp_dates,
        &compound(1100.0, sp_returns),
    )?);

    let exr_dates: Vec<NaiveDate> = all_days
        .iter()
        .copied()
        .filter(|d| match d.weekday() {
            Weekday::Sun => false,
            Weekday::Sat => rng.gen_bool(EXR_SATURDAY_PROB),
            _ => true,
        })
        .collect();
    let exr_returns: Vec<f64> = (0..exr_dates.len())
        .map(|_| normal(EXR_SD, &mut rng))
        .collect();
    series.push(to_series(
        EXR_ID,
        &exr_dates,
        &compound(1200.0, exr_returns),
    )?);

    let mut block_a = Vec::new();
    let mut block_b = Vec::new();
    for (block, factor, count, ids) in [
        ("A", &fa, spec.block_a, &mut block_a),
        ("B", &fb, spec.block_b, &mut block_b),
    ] {
        for k in 0..count {
            let id = format!("{block}{:02}", k + 1);
            let returns: Vec<f64> = match spec.signal {
                Signal::Planted => factor
                    .iter()
                    .map(|f| f + normal(IDIOSYNCRATIC_SD, &mut rng))
                    .collect(),
                Signal::Null => (0..n).map(|_| normal(1.0, &mut rng)).collect(),
            };
            series.push(to_series(
                &id,
                &calendar,
                &compound(50.0 + k as f64, returns),
            )?);
            ids.push(id);
        }
    }

    Ok(SyntheticMarket {
        spec,
        series,
        block_a,
        block_b,
    })
}

impl SyntheticMarket {
    pub fn panel(&self) -> Result<AlignedPanel> {
        align_panel(&self.series, INDEX_ID, DateRange::unbounded())
    }

    /// Default config forecasting the index, with windows starting at the
    /// market's first year.
    pub fn config(&self, scheme: WindowScheme) -> ExperimentConfig {
        let mut config = ExperimentConfig::new(INDEX_ID, INDEX_ID, INDEX_ID, SP500_ID, EXR_ID);
        config.windows = WindowSettings {
            first_year: self.spec.first_year,
            scheme,
        };
        config
    }

    /// Constituent ids, block A first.
    pub fn constituent_ids(&self) -> Vec<String> {
        self.block_a.iter().chain(&self.block_b).cloned().collect()
    }
}

/// Angle in radians between two loading vectors.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}
