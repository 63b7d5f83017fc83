//! Price series, calendar alignment, RDP indicators and direction labels.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Direction of a one-day price move. A flat close counts as [`Direction::Up`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    /// Direction of the move from `from` to `to`; no change maps to up.
    #[inline]
    pub fn of_move(from: f64, to: f64) -> Self {
        if to >= from {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    /// Sign of a decision value; zero maps to up.
    #[inline]
    pub fn from_sign(value: f64) -> Self {
        if value >= 0.0 {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    /// `+1.0` for up, `-1.0` for down.
    #[inline]
    pub fn signed(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub close: f64,
}

/// Dated closing prices of one instrument, strictly increasing in date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    instrument_id: String,
    observations: Vec<Observation>,
}

impl PriceSeries {
    /// Sorts the observations by date and validates them: dates must be
    /// unique and prices finite and strictly positive.
    pub fn new(
        instrument_id: impl Into<String>,
        mut observations: Vec<Observation>,
    ) -> Result<Self> {
        let instrument_id = instrument_id.into();
        for o in &observations {
            if !(o.close.is_finite() && o.close > 0.0) {
                return Err(Error::validation(format!(
                    "{instrument_id}: close on {} must be positive, got {}",
                    o.date, o.close
                )));
            }
        }
        observations.sort_by_key(|o| o.date);
        if let Some(w) = observations.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::validation(format!(
                "{instrument_id}: duplicate date {}",
                w[0].date
            )));
        }
        Ok(Self {
            instrument_id,
            observations,
        })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Half-open calendar interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        Self { start, end }
    }

    /// The range covering every representable date.
    pub fn unbounded() -> Self {
        Self {
            start: NaiveDate::MIN,
            end: NaiveDate::MAX,
        }
    }

    #[inline]
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date < self.end
    }
}

/// Date-by-instrument price matrix on a single reference calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPanel {
    calendar: Vec<NaiveDate>,
    instruments: Vec<String>,
    values: Matrix,
}

impl AlignedPanel {
    /// Checks shape, calendar order, unique instrument ids and positivity.
    pub fn new(calendar: Vec<NaiveDate>, instruments: Vec<String>, values: Matrix) -> Result<Self> {
        if values.rows() != calendar.len() || values.cols() != instruments.len() {
            return Err(Error::domain(format!(
                "panel values are {}x{} but calendar has {} dates and {} instruments",
                values.rows(),
                values.cols(),
                calendar.len(),
                instruments.len()
            )));
        }
        if calendar.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "panel calendar must be strictly increasing",
            ));
        }
        for (i, id) in instruments.iter().enumerate() {
            if instruments[..i].contains(id) {
                return Err(Error::validation(format!("duplicate instrument `{id}`")));
            }
        }
        if values
            .as_slice()
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::validation(
                "panel prices must be finite and positive",
            ));
        }
        Ok(Self {
            calendar,
            instruments,
            values,
        })
    }

    pub fn calendar(&self) -> &[NaiveDate] {
        &self.calendar
    }

    pub fn instruments(&self) -> &[String] {
        &self.instruments
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.calendar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calendar.is_empty()
    }

    pub fn index_of(&self, instrument: &str) -> Option<usize> {
        self.instruments.iter().position(|i| i == instrument)
    }

    pub fn column(&self, instrument: &str) -> Result<Vec<f64>> {
        let j = self
            .index_of(instrument)
            .ok_or_else(|| Error::domain(format!("instrument `{instrument}` not in panel")))?;
        Ok(self.values.column(j))
    }

    /// Splits the panel back into one series per instrument.
    pub fn to_series(&self) -> Vec<PriceSeries> {
        self.instruments
            .iter()
            .enumerate()
            .map(|(j, id)| PriceSeries {
                instrument_id: id.clone(),
                observations: self
                    .calendar
                    .iter()
                    .enumerate()
                    .map(|(i, &date)| Observation {
                        date,
                        close: self.values[(i, j)],
                    })
                    .collect(),
            })
            .collect()
    }

    /// Copy of the panel with one price replaced. Used by lookahead audits.
    pub fn with_price(&self, row: usize, instrument: usize, close: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values[(row, instrument)] = close;
        Self::new(self.calendar.clone(), self.instruments.clone(), values)
    }
}

/// Aligns every series to the reference instrument's trading days inside
/// `range`.
///
/// Observations on dates the reference did not trade are dropped; reference
/// dates an instrument lacks are filled with that instrument's most recent
/// earlier close. Nothing is ever back-filled: an instrument without any
/// observation on or before the first calendar date is an alignment error.
/// Columns follow the order of `series`.
pub fn align_panel(
    series: &[PriceSeries],
    reference: &str,
    range: DateRange,
) -> Result<AlignedPanel> {
    let reference_series = series
        .iter()
        .find(|s| s.instrument_id == reference)
        .ok_or_else(|| Error::domain(format!("reference `{reference}` is not among the series")))?;
    let calendar: Vec<NaiveDate> = reference_series
        .observations
        .iter()
        .map(|o| o.date)
        .filter(|d| range.contains(*d))
        .collect();
    if calendar.is_empty() {
        return Err(Error::domain(format!(
            "reference `{reference}` has no dates in [{}, {})",
            range.start, range.end
        )));
    }

    let mut values = Matrix::zeros(calendar.len(), series.len());
    let mut instruments = Vec::with_capacity(series.len());
    for (j, s) in series.iter().enumerate() {
        instruments.push(s.instrument_id.clone());
        let obs = &s.observations;
        let mut next = 0;
        let mut last: Option<f64> = None;
        for (i, &date) in calendar.iter().enumerate() {
            while next < obs.len() && obs[next].date <= date {
                last = Some(obs[next].close);
                next += 1;
            }
            values[(i, j)] = last.ok_or_else(|| Error::Alignment {
                instrument: s.instrument_id.to_string(),
                date,
            })?;
        }
    }
    AlignedPanel::new(calendar, instruments, values)
}

/// Relative difference in percentage at lag `lag`:
/// `(p[j] - p[j-lag]) / p[j-lag] * 100` for `j` in `lag..len`.
pub fn rdp(prices: &[f64], lag: usize) -> Result<Vec<f64>> {
    if lag == 0 {
        return Err(Error::domain("RDP lag must be positive"));
    }
    if lag >= prices.len() {
        return Err(Error::domain(format!(
            "RDP lag {lag} needs more than {} prices",
            prices.len()
        )));
    }
    if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::validation("RDP needs finite positive prices"));
    }
    Ok(prices
        .iter()
        .zip(&prices[lag..])
        .map(|(then, now)| (now - then) / then * 100.0)
        .collect())
}

/// Direction of each next-day move; `labels[j]` is the move from `j` to
/// `j + 1`, so the output is one shorter than the input.
pub fn direction_labels(prices: &[f64]) -> Result<Vec<Direction>> {
    if prices.len() < 2 {
        return Err(Error::domain("direction labels need at least two prices"));
    }
    Ok(prices
        .windows(2)
        .map(|w| Direction::of_move(w[0], w[1]))
        .collect())
}

/// Dated RDP values of one panel column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub instrument_id: String,
    pub lag: usize,
    pub values: Vec<(NaiveDate, f64)>,
}

impl ReturnSeries {
    pub fn from_panel(panel: &AlignedPanel, instrument: &str, lag: usize) -> Result<Self> {
        let prices = panel.column(instrument)?;
        let values = rdp(&prices, lag)?;
        Ok(Self {
            instrument_id: instrument.to_string(),
            lag,
            values: panel.calendar()[lag..]
                .iter()
                .copied()
                .zip(values)
                .collect(),
        })
    }
}

/// Dated next-day directions of one panel column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSeries {
    pub instrument_id: String,
    pub values: Vec<(NaiveDate, Direction)>,
}

impl LabelSeries {
    pub fn from_panel(panel: &AlignedPanel, instrument: &str) -> Result<Self> {
        let prices = panel.column(instrument)?;
        let labels = direction_labels(&prices)?;
        Ok(Self {
            instrument_id: instrument.to_string(),
            values: panel.calendar().iter().copied().zip(labels).collect(),
        })
    }
}
