//! Width noise of a Fock state behind detectors of decreasing efficiency,
//! with and without dark counts.
//!
//! `cargo run --release --example detector_efficiency`

use multipixel::prelude::*;

fn main() -> multipixel::Result<()> {
    let runs = 20_000;
    let grid = PixelGrid::new(5, 1.0)?;
    let probs = pixel_probabilities(&SpatialMode::gaussian(2.0)?, &grid, ProbabilityMethod::Intensity)?;
    let dm = discrete_moments(&probs, &grid)?;
    let state = PhotonState::fock(100);
    let master = Substream::new(11);

    println!("{:>6}{:>12}{:>14}{:>12}{:>12}", "eta", "dark/frame", "noise (MC)", "se", "theory");
    for (k, eta) in [1.0, 0.9, 0.5].into_iter().enumerate() {
        for (dark_rate, exposure) in [(0.0, 1.0), (10.0, 300e-9), (2e7, 1e-6)] {
            let detector = DetectorModel::new(eta, dark_rate, exposure)?;
            let setup = ExperimentSetup::new(grid, PhotonNumberDistribution::new(state), &probs, &detector, runs)?;
            let mc = setup.run(&master.child(k as u64)).summarize()?;
            let theory = lossy_predictions(&state.moments(), eta, &dm, Normalization::Renormalized)?;
            let noise = mc.width_noise();
            println!(
                "{eta:>6}{:>12.2e}{:>14.5}{:>12.5}{:>12.5}",
                dark_rate * exposure,
                noise.value,
                noise.se,
                theory.width.noise()
            );
        }
    }
    Ok(())
}
