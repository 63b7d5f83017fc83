use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::timeseries::DateRange;
use crate::{Error, Result};

/// Rolling train/test scheme in whole calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowScheme {
    #[serde(default = "default_train_years")]
    pub train_years: u32,
    #[serde(default = "default_test_years")]
    pub test_years: u32,
    /// Years between consecutive windows; defaults to `test_years` so test
    /// periods tile the calendar.
    #[serde(default)]
    pub step_years: Option<u32>,
    #[serde(default = "default_iterations")]
    pub iterations: u32,
}

fn default_train_years() -> u32 {
    3
}
fn default_test_years() -> u32 {
    1
}
fn default_iterations() -> u32 {
    7
}

impl Default for WindowScheme {
    fn default() -> Self {
        Self {
            train_years: default_train_years(),
            test_years: default_test_years(),
            step_years: None,
            iterations: default_iterations(),
        }
    }
}

/// One train/test split. Both intervals are half-open and meet at
/// `train.end == test.start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub iteration: usize,
    pub train: DateRange,
    pub test: DateRange,
}

fn jan1(year: i64) -> Result<NaiveDate> {
    i32::try_from(year)
        .ok()
        .and_then(|y| NaiveDate::from_ymd_opt(y, 1, 1))
        .ok_or_else(|| Error::domain(alloc::format!("year {year} is out of range")))
}

/// Window `i` (1-based) trains on `[first + (i-1)·step, … + train_years)` and
/// tests on the following `test_years`, all on January 1st boundaries.
pub fn build_windows(first_year: i32, scheme: &WindowScheme) -> Result<Vec<WindowSpec>> {
    if scheme.iterations == 0 {
        return Err(Error::domain("window scheme needs at least one iteration"));
    }
    if scheme.train_years == 0 || scheme.test_years == 0 {
        return Err(Error::domain(
            "train and test periods must span at least one year",
        ));
    }
    let step = i64::from(scheme.step_years.unwrap_or(scheme.test_years));
    if step == 0 {
        return Err(Error::domain("window step must be at least one year"));
    }
    (0..i64::from(scheme.iterations))
        .map(|i| {
            let start = i64::from(first_year) + i * step;
            let split = start + i64::from(scheme.train_years);
            let end = split + i64::from(scheme.test_years);
            Ok(WindowSpec {
                iteration: (i + 1) as usize,
                train: DateRange::new(jan1(start)?, jan1(split)?),
                test: DateRange::new(jan1(split)?, jan1(end)?),
            })
        })
        .collect()
}
