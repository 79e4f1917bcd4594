//! Monte Carlo beam-width noise against the discrete and continuous theory.
//!
//! `cargo run --release --example width_noise_sweep`

use multipixel::prelude::*;

fn main() -> multipixel::Result<()> {
    let runs = 20_000;
    let grid = PixelGrid::new(5, 1.0)?;
    let mode = SpatialMode::gaussian(2.0)?;
    let probs = pixel_probabilities(&mode, &grid, ProbabilityMethod::Intensity)?;
    let dm = discrete_moments(&probs, &grid)?;
    let master = Substream::new(2024);

    println!("{:<10}{:>6}{:>12}{:>10}{:>12}{:>12}", "state", "nbar", "Var/W^2", "se", "discrete", "continuous");
    for (k, nbar) in [16u64, 64, 256].into_iter().enumerate() {
        let states = [
            ("fock", PhotonState::fock(nbar)),
            ("coherent", PhotonState::coherent(nbar as f64)?),
            ("thermal", PhotonState::thermal(nbar as f64)?),
        ];
        for (s, (name, state)) in states.into_iter().enumerate() {
            let setup = ExperimentSetup::new(
                grid,
                PhotonNumberDistribution::new(state),
                &probs,
                &DetectorModel::ideal(),
                runs,
            )?;
            let mc = setup.run(&master.child((k * 3 + s) as u64)).summarize()?;
            let m = state.moments();
            let disc = discrete_width_prediction(&m, &dm, Normalization::Renormalized)?;
            let cont = continuous_predictions(&m, &mode)?;
            println!(
                "{name:<10}{nbar:>6}{:>12.5}{:>10.5}{:>12.5}{:>12.5}",
                mc.width_normalized_variance.value,
                mc.width_normalized_variance.se,
                disc.normalized_variance,
                cont.width.normalized_variance
            );
        }
    }
    Ok(())
}
