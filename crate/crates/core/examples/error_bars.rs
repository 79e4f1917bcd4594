//! Error bars from repeated experiments: the spread of the mean width over
//! repetitions halves when the runs per experiment are quadrupled.
//!
//! `cargo run --release --example error_bars`

use multipixel::prelude::*;

fn main() -> multipixel::Result<()> {
    let grid = PixelGrid::new(5, 1.0)?;
    let probs = pixel_probabilities(&SpatialMode::gaussian(2.0)?, &grid, ProbabilityMethod::Intensity)?;
    let dist = PhotonNumberDistribution::new(PhotonState::coherent(100.0)?);
    let stream = Substream::new(3);

    let mut spreads = Vec::new();
    for runs in [10, 40, 160] {
        let setup = ExperimentSetup::new(grid, dist.clone(), &probs, &DetectorModel::ideal(), runs)?;
        let (stats, _) = repeat_with_error_bars(&setup, 200, &stream.child(runs as u64), Seeding::Independent)?;
        let rel = stats.width_mean_spread() / stats.width_mean.mean;
        println!(
            "R = {runs:>3}: mean width {:.4}, spread {:.4} ({:.2}%)",
            stats.width_mean.mean,
            stats.width_mean_spread(),
            100.0 * rel
        );
        spreads.push(rel);
    }
    for pair in spreads.windows(2) {
        println!("spread ratio for 4x runs: {:.3}", pair[1] / pair[0]);
    }
    Ok(())
}
