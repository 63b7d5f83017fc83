//! Command-line interface. Usage errors exit with 2, data and validation
//! errors with 1.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcasvm_core::backtest::{summarize, BacktestReport, PanelFeatures};
use pcasvm_core::pca::{contribution, fit_pca_with};
use pcasvm_core::timeseries::AlignedPanel;
use rayon::prelude::*;

use crate::config::{load_config, LoadedConfig, Override};
use crate::error::{Error, Result};
use crate::formats::{biplot_csv, scree_csv};
use crate::io::{default_id, panel_csv, price_csv, read_price_file, write_atomic};
use crate::run::run_parallel;

#[derive(Debug, Parser)]
#[command(
    name = "pcasvm",
    version,
    about = "PCA + kernel SVM direction forecasting"
)]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Worker threads for parallel steps (default: all cores).
    #[arg(long, value_name = "N", global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Experiment config (JSON).
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,

    /// Replace a config value by dotted path, e.g. `svm.C=100`. Repeatable;
    /// the last occurrence of a key wins.
    #[arg(long = "override", value_name = "KEY=VALUE", value_parser = clap::value_parser!(Override))]
    pub overrides: Vec<Override>,
}

#[derive(Debug, Args)]
pub struct PanelArgs {
    #[command(flatten)]
    pub config: ConfigArgs,

    /// Aligned panel CSV from `align`; the config's sources are read and
    /// aligned when absent.
    #[arg(long, value_name = "FILE")]
    pub panel: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderFormat {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate `date,close` price files and rewrite them normalized (ISO
    /// dates, ascending).
    Ingest {
        #[arg(required = true, value_name = "CSV")]
        inputs: Vec<PathBuf>,
        /// Output directory; files are named `<id>.csv`.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// chrono format of the input dates, e.g. `%d/%m/%Y`.
        #[arg(long, value_name = "FMT")]
        date_format: Option<String>,
        /// Instrument id for a single input (default: file stem).
        #[arg(long)]
        id: Option<String>,
    },
    /// Align the config's sources on the reference calendar and write the
    /// panel CSV.
    Align {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Whole-period contribution rates of the constituents (scree CSV).
    PcaReport {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Whole-period loadings on the first two components (biplot CSV).
    Biplot {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Raw eigenvector entries instead of loadings scaled by √λ.
        #[arg(long)]
        unscaled: bool,
    },
    /// Rolling-window comparison of the configured models.
    Backtest {
        #[command(flatten)]
        panel: PanelArgs,
        /// Report JSON.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        text: Option<PathBuf>,
        /// Write every fitted classifier as a model JSON here.
        #[arg(long, value_name = "DIR")]
        models_dir: Option<PathBuf>,
    },
    /// Render a report JSON as an aligned table or CSV.
    Render {
        #[arg(long, value_name = "FILE")]
        report: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RenderFormat::Text)]
        format: RenderFormat,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format(|buf, record| {
            writeln!(
                buf,
                "ts={} level={} {}",
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                record.level().as_str().to_ascii_lowercase(),
                record.args()
            )
        })
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn load(args: &ConfigArgs) -> Result<LoadedConfig> {
    let loaded = load_config(&args.config, &args.overrides)?;
    log::info!(
        "event=config_loaded path={:?} overrides={}",
        args.config.display().to_string(),
        args.overrides.len()
    );
    Ok(loaded)
}

fn load_panel(args: &PanelArgs) -> Result<(LoadedConfig, AlignedPanel)> {
    let loaded = load(&args.config)?;
    let panel = loaded.panel(args.panel.as_deref())?;
    log::info!(
        "event=panel_ready rows={} instruments={}",
        panel.len(),
        panel.instruments().len()
    );
    Ok((loaded, panel))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes)?;
    log::info!(
        "event=written path={:?} bytes={}",
        path.display().to_string(),
        bytes.len()
    );
    Ok(())
}

fn ingest(
    inputs: &[PathBuf],
    out_dir: &Path,
    date_format: Option<&str>,
    id: Option<&str>,
) -> Result<()> {
    if id.is_some() && inputs.len() != 1 {
        return Err(Error::Usage("--id needs exactly one input file".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let series = inputs
        .par_iter()
        .map(|p| read_price_file(p, id, date_format))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::HashSet::new();
    for s in &series {
        if !seen.insert(s.instrument_id()) {
            return Err(Error::Usage(format!(
                "instrument id `{}` given twice",
                s.instrument_id()
            )));
        }
    }
    for s in &series {
        let path = out_dir.join(format!("{}.csv", s.instrument_id()));
        // ids come from file stems or --id; refuse anything that leaves out_dir
        if default_id(&path)? != s.instrument_id() || path.parent() != Some(out_dir) {
            return Err(Error::Usage(format!(
                "instrument id `{}` is not a plain file name",
                s.instrument_id()
            )));
        }
        write(&path, &price_csv(s))?;
        log::info!("event=ingested id={} rows={}", s.instrument_id(), s.len());
    }
    Ok(())
}

fn whole_period(
    loaded: &LoadedConfig,
    panel: &AlignedPanel,
) -> Result<(PanelFeatures, pcasvm_core::pca::PcaModel)> {
    let config = &loaded.config;
    let frame = PanelFeatures::new(panel, config)?;
    let model = fit_pca_with(frame.all_constituent_returns(), config.pca.options())?;
    Ok((frame, model))
}

fn read_report(path: &Path) -> Result<BacktestReport> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Ingest {
            inputs,
            out_dir,
            date_format,
            id,
        } => ingest(&inputs, &out_dir, date_format.as_deref(), id.as_deref()),
        Command::Align { config, out } => {
            let loaded = load(&config)?;
            let panel = loaded.load_panel()?;
            log::info!(
                "event=aligned rows={} instruments={}",
                panel.len(),
                panel.instruments().len()
            );
            write(&out, &panel_csv(&panel))
        }
        Command::PcaReport { panel, out } => {
            let (loaded, panel) = load_panel(&panel)?;
            let (_, model) = whole_period(&loaded, &panel)?;
            let report = contribution(&model)?.with_selection(loaded.config.pca.threshold);
            log::info!(
                "event=scree components={} first_rate={:.4} selected_m={}",
                report.rates.len(),
                report.rates[0],
                report.selected_m.unwrap_or(0)
            );
            write(&out, &scree_csv(&report))
        }
        Command::Biplot {
            panel,
            out,
            unscaled,
        } => {
            let (loaded, panel) = load_panel(&panel)?;
            let (frame, model) = whole_period(&loaded, &panel)?;
            let loadings = model.biplot_loadings(!unscaled)?;
            write(&out, &biplot_csv(frame.constituent_ids(), &loadings))
        }
        Command::Backtest {
            panel,
            out,
            csv,
            text,
            models_dir,
        } => {
            let (loaded, panel) = load_panel(&panel)?;
            let mut run = run_parallel(&loaded.config, &panel, models_dir.is_some())?;
            run.report.metadata.generated_at =
                Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
            let mut json = serde_json::to_vec_pretty(&run.report).expect("reports serialize");
            json.push(b'\n');
            write(&out, &json)?;
            let rendered = summarize(&run.report);
            if let Some(p) = csv {
                write(&p, rendered.csv.as_bytes())?;
            }
            if let Some(p) = text {
                write(&p, rendered.text.as_bytes())?;
            }
            if let Some(dir) = models_dir {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                for (name, doc) in &run.models {
                    write(&dir.join(name), &doc.to_json())?;
                }
            }
            print!("{}", rendered.text);
            Ok(())
        }
        Command::Render {
            report,
            out,
            format,
        } => {
            let rendered = summarize(&read_report(&report)?);
            let body = match format {
                RenderFormat::Text => rendered.text,
                RenderFormat::Csv => rendered.csv,
            };
            match out {
                Some(p) => write(&p, body.as_bytes()),
                None => {
                    print!("{body}");
                    Ok(())
                }
            }
        }
    }
}

fn error_chain(e: &Error) -> String {
    let mut msg = e.to_string();
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        let part = s.to_string();
        if !msg.contains(&part) {
            msg.push_str(": ");
            msg.push_str(&part);
        }
        source = s.source();
    }
    msg
}

/// Parses `std::env::args`, runs the subcommand and maps the outcome to an
/// exit status.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!(
                "event=failed exit={} error={:?}",
                e.exit_code(),
                error_chain(&e)
            );
            ExitCode::from(e.exit_code())
        }
    }
}
