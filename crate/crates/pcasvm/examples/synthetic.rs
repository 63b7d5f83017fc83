//! Writes a synthetic market as `date,close` files plus a ready-to-run
//! experiment config.
//!
//! ```text
//! cargo run -p pcasvm --example synthetic -- data/synthetic
//! cargo run -p pcasvm --example synthetic -- /tmp/null --signal null --first-year 1990 --years 31
//! ```

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pcasvm_core::backtest::{Source, WindowScheme};
use pcasvm_core::synthetic::{generate, Signal, SyntheticSpec};

#[derive(Parser)]
struct Args {
    out_dir: PathBuf,
    #[arg(long, default_value = "planted")]
    signal: String,
    #[arg(long, default_value_t = 2002)]
    seed: u64,
    #[arg(long, default_value_t = 2002)]
    first_year: i32,
    #[arg(long, default_value_t = 10)]
    years: u32,
}

fn run(args: Args) -> pcasvm::Result<()> {
    let signal = match args.signal.as_str() {
        "planted" => Signal::Planted,
        "null" => Signal::Null,
        other => return Err(pcasvm::Error::Usage(format!("unknown signal `{other}`"))),
    };
    let market = generate(SyntheticSpec {
        seed: args.seed,
        first_year: args.first_year,
        years: args.years,
        signal,
        ..SyntheticSpec::default()
    })?;
    let prices = args.out_dir.join("prices");
    std::fs::create_dir_all(&prices)
        .map_err(|e| pcasvm::Error::Format(format!("{}: {e}", prices.display())))?;

    let mut config = market.config(WindowScheme::default());
    for s in &market.series {
        let file = format!("prices/{}.csv", s.instrument_id());
        pcasvm::io::write_atomic(&args.out_dir.join(&file), &pcasvm::io::price_csv(s))?;
        config.panel.sources.push(Source {
            id: s.instrument_id().to_owned(),
            path: file,
        });
    }
    let mut json = serde_json::to_vec_pretty(&config).expect("configs serialize");
    json.push(b'\n');
    pcasvm::io::write_atomic(&args.out_dir.join("config.json"), &json)?;
    println!(
        "wrote {} instruments ({} + {} block constituents) to {}",
        market.series.len(),
        market.block_a.len(),
        market.block_b.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
