//! A sweep driven by a TOML config, printed as a results table and as
//! long-format plot data. The `multipixel` binary writes the same tables
//! to disk.
//!
//! `cargo run --release --example config_sweep`

use multipixel::run::{emit_plot_data, run, PlotQuantity, RunConfig};

const CONFIG: &str = r#"
state = "fock"
nbar = [25.0, 100.0, 400.0]
efficiency = [1.0, 0.9, 0.5]
pixels = 10
waist = 2.0
prob_method = "intensity"
runs = 5000
repetitions = 5
seed = 1
"#;

fn main() -> multipixel::Result<()> {
    let config = RunConfig::from_toml_str(CONFIG)?;
    let report = run(&config)?;
    print!("{}", report.table.to_csv_string()?);
    println!();
    print!("{}", emit_plot_data(&report.table, PlotQuantity::WidthNoise)?);
    Ok(())
}
