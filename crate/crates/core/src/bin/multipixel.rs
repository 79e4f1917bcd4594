//! Command-line front end for [`multipixel::run`].
//!
//! Precedence: built-in defaults, then `--config`, then flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use multipixel::modes::ProbabilityMethod;
use multipixel::run::{run_to_dir, PlotQuantity, RunConfig, StateKind};

#[derive(Debug, Parser)]
#[command(version, about = "Beam width and position noise sweeps on a pixelated detector")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    state: Option<StateKind>,
    /// Comma-separated mean photon numbers.
    #[arg(long, value_delimiter = ',')]
    nbar: Option<Vec<f64>>,
    /// Comma-separated detection efficiencies.
    #[arg(long, value_delimiter = ',')]
    efficiency: Option<Vec<f64>>,
    /// Dark counts per second over the whole detector.
    #[arg(long)]
    dark_rate: Option<f64>,
    /// Exposure per frame in seconds.
    #[arg(long)]
    exposure: Option<f64>,
    /// Pixels per side (2M).
    #[arg(long)]
    pixels: Option<usize>,
    #[arg(long)]
    pixel_size: Option<f64>,
    #[arg(long)]
    waist: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    prob_method: Option<ProbabilityMethod>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every frame to frames.rle.
    #[arg(long)]
    frames: bool,
    /// Comma-separated plot series to write (width-noise, position-noise, means).
    #[arg(long, value_delimiter = ',')]
    plot: Option<Vec<PlotQuantity>>,
}

fn build_config(cli: Cli) -> multipixel::Result<RunConfig> {
    let mut c = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    macro_rules! apply {
        ($($field:ident),*) => {$(
            if let Some(v) = cli.$field {
                c.$field = v;
            }
        )*};
    }
    apply!(state, nbar, efficiency, dark_rate, exposure, pixels, pixel_size, waist, runs, repetitions, prob_method, out);
    if cli.seed.is_some() {
        c.seed = cli.seed;
    }
    if let Some(p) = cli.plot {
        c.plots = p;
    }
    c.frames |= cli.frames;
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let result = build_config(Cli::parse()).and_then(|c| run_to_dir(&c).map(|r| (c, r)));
    match result {
        Ok((c, report)) => {
            println!(
                "wrote {} rows to {} ({})",
                report.table.rows.len(),
                c.out.join("results.csv").display(),
                report.table.config_hash
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
