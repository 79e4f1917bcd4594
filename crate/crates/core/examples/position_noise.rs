//! Beam-position noise for a centered and a displaced beam.
//!
//! Centered, the position variance is `D_x / n` for every state. Displaced,
//! the photon-number variance leaks in through `G_x^2`.
//!
//! `cargo run --release --example position_noise`

use multipixel::prelude::*;

fn main() -> multipixel::Result<()> {
    let runs = 20_000;
    let nbar = 100;
    let grid = PixelGrid::new(5, 1.0)?;
    let master = Substream::new(7);

    for (label, x0) in [("centered", 0.0), ("displaced x0 = 1", 1.0)] {
        let mode = SpatialMode::gaussian_at(2.0, x0, 0.0)?;
        let probs = pixel_probabilities(&mode, &grid, ProbabilityMethod::Intensity)?;
        let dm = discrete_moments(&probs, &grid)?;
        println!("{label}: D_x / n = {:.5}", dm.d_x / dm.captured / nbar as f64);
        for (s, state) in [
            PhotonState::fock(nbar),
            PhotonState::coherent(nbar as f64)?,
            PhotonState::thermal(nbar as f64)?,
        ]
        .into_iter()
        .enumerate()
        {
            let setup = ExperimentSetup::new(grid, PhotonNumberDistribution::new(state), &probs, &DetectorModel::ideal(), runs)?;
            let mc = setup.run(&master.child(s as u64 + (x0 as u64) * 10)).summarize()?;
            let theory = discrete_position_prediction(&state.moments(), &dm, Normalization::Renormalized)?;
            println!(
                "  {:<45} Var[P_x] = {:.5} +- {:.5}  theory {:.5}",
                format!("{state:?}"),
                mc.position_x_variance.value,
                mc.position_x_variance.se,
                theory.variance_x
            );
        }
    }
    Ok(())
}
