use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::BacktestReport;

/// Human and spreadsheet renderings of a report. Percentages are rounded to
/// two decimals here and only here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub csv: String,
    pub text: String,
}

const FOOTNOTE: &str = "* single iteration: standard deviation is undefined and shown as 0";

pub fn summarize(report: &BacktestReport) -> RenderedReport {
    let single = report.iterations.len() == 1;
    let labels: Vec<&str> = report.models.iter().map(|m| m.label()).collect();
    let pct = |v: f64| format!("{v:.2}%");

    let mut csv = String::from("iteration");
    for l in &labels {
        csv.push(',');
        csv.push_str(l);
    }
    csv.push('\n');
    for it in &report.iterations {
        let _ = write!(csv, "{}", it.iteration);
        for v in &it.hit_ratios {
            let _ = write!(csv, ",{v:.2}");
        }
        csv.push('\n');
    }
    csv.push_str("average");
    for s in &report.summary {
        let _ = write!(csv, ",{:.2}", s.mean);
    }
    csv.push('\n');
    csv.push_str(if single { "std*" } else { "std" });
    for s in &report.summary {
        let _ = write!(csv, ",{:.2}", s.std);
    }
    csv.push('\n');

    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0).max(8) + 2;
    let mut text = format!("Hit ratio of forecasting {}\n", report.target);
    let _ = write!(text, "{:<10}", "Iteration");
    for l in &labels {
        let _ = write!(text, "{l:>width$}");
    }
    text.push('\n');
    let rule_len = 10 + width * labels.len();
    let rule: String = core::iter::repeat('-').take(rule_len).collect();
    text.push_str(&rule);
    text.push('\n');
    for it in &report.iterations {
        let _ = write!(text, "{:<10}", it.iteration);
        for v in &it.hit_ratios {
            let _ = write!(text, "{:>width$}", pct(*v));
        }
        text.push('\n');
    }
    text.push_str(&rule);
    text.push('\n');
    let _ = write!(text, "{:<10}", "Average");
    for s in &report.summary {
        let _ = write!(text, "{:>width$}", pct(s.mean));
    }
    text.push('\n');
    let _ = write!(text, "{:<10}", if single { "Std*" } else { "Std" });
    for s in &report.summary {
        let _ = write!(text, "{:>width$}", pct(s.std));
    }
    text.push('\n');
    if single {
        text.push_str(FOOTNOTE);
        text.push('\n');
    }
    RenderedReport { csv, text }
}
