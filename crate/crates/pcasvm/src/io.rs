//! Price and panel CSV files, and atomic output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use pcasvm_core::timeseries::{AlignedPanel, Observation, PriceSeries};
use pcasvm_core::Matrix;

use crate::error::{Error, Result};

pub const ISO_DATE: &str = "%Y-%m-%d";

fn parse_error(line: u64, message: impl Into<String>) -> pcasvm_core::Error {
    pcasvm_core::Error::Parse {
        line: line as usize,
        message: message.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(e: csv::Error) -> pcasvm_core::Error {
    let line = e.position().map_or(0, |p| p.line());
    parse_error(line, e.to_string())
}

fn parse_date(text: &str, format: &str, line: u64) -> pcasvm_core::Result<NaiveDate> {
    NaiveDate::parse_from_str(text, format).map_err(|e| {
        parse_error(
            line,
            format!("bad date `{text}` for format `{format}`: {e}"),
        )
    })
}

fn reader<R: Read>(raw: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw)
}

/// Reads a `date,close` file. Dates are ISO-8601 unless `date_format` (a
/// chrono format string) says otherwise. Rows may come in any order.
pub fn parse_price_csv<R: Read>(
    raw: R,
    instrument_id: &str,
    date_format: Option<&str>,
) -> pcasvm_core::Result<PriceSeries> {
    let format = date_format.unwrap_or(ISO_DATE);
    let mut rdr = reader(raw);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.iter().collect::<Vec<_>>() != ["date", "close"] {
        return Err(parse_error(1, "expected header `date,close`"));
    }
    let mut observations = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        let date = parse_date(&record[0], format, line)?;
        let close: f64 = record[1]
            .parse()
            .map_err(|_| parse_error(line, format!("bad price `{}`", &record[1])))?;
        observations.push(Observation { date, close });
    }
    PriceSeries::new(instrument_id, observations)
}

/// Instrument id implied by a file name: its stem.
pub fn default_id(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| {
            Error::Usage(format!(
                "cannot derive an instrument id from {}",
                path.display()
            ))
        })
}

pub fn read_price_file(
    path: &Path,
    instrument_id: Option<&str>,
    date_format: Option<&str>,
) -> Result<PriceSeries> {
    let id = match instrument_id {
        Some(id) => id.to_owned(),
        None => default_id(path)?,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_price_csv(file, &id, date_format).map_err(|e| Error::data(path, e))
}

fn write_csv(rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        // writing into a Vec cannot fail
        w.write_record(&row).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

/// Normalized `date,close` CSV with ISO dates, ascending.
pub fn price_csv(series: &PriceSeries) -> Vec<u8> {
    let header = vec!["date".to_owned(), "close".to_owned()];
    write_csv(
        std::iter::once(header).chain(
            series
                .observations()
                .iter()
                .map(|o| vec![o.date.format(ISO_DATE).to_string(), o.close.to_string()]),
        ),
    )
}

/// `date` column followed by one column per instrument. Prices use the
/// shortest representation that reads back to the same `f64`.
pub fn panel_csv(panel: &AlignedPanel) -> Vec<u8> {
    let header = std::iter::once("date".to_owned())
        .chain(panel.instruments().iter().cloned())
        .collect();
    let values = panel.values();
    let rows = panel.calendar().iter().enumerate().map(|(i, d)| {
        std::iter::once(d.format(ISO_DATE).to_string())
            .chain(values.row(i).iter().map(f64::to_string))
            .collect()
    });
    write_csv(std::iter::once(header).chain(rows))
}

pub fn parse_panel_csv<R: Read>(raw: R) -> pcasvm_core::Result<AlignedPanel> {
    let mut rdr = reader(raw);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.len() < 2 || &header[0] != "date" {
        return Err(parse_error(1, "expected header `date,<instrument>,...`"));
    }
    let instruments: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut calendar = Vec::new();
    let mut data = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        calendar.push(parse_date(&record[0], ISO_DATE, line)?);
        for cell in record.iter().skip(1) {
            data.push(
                cell.parse::<f64>()
                    .map_err(|_| parse_error(line, format!("bad price `{cell}`")))?,
            );
        }
    }
    let values = Matrix::from_vec(calendar.len(), instruments.len(), data)?;
    AlignedPanel::new(calendar, instruments, values)
}

pub fn read_panel_file(path: &Path) -> Result<AlignedPanel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_panel_csv(file).map_err(|e| Error::data(path, e))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
