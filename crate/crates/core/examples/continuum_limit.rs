//! Discrete mean width against the continuous value as the camera is
//! subdivided into finer pixels.
//!
//! `cargo run --example continuum_limit`

use multipixel::prelude::*;

fn main() -> multipixel::Result<()> {
    let half_width = 5.0;
    let mode = SpatialMode::gaussian(2.0)?;
    let continuous = mode.continuous_moments().d;
    println!("continuous D = {continuous}");

    for method in [ProbabilityMethod::Amplitude, ProbabilityMethod::Intensity] {
        println!("{method}:");
        for side in [10, 20, 40, 80] {
            let grid = PixelGrid::with_side(side, 2.0 * half_width / side as f64)?;
            let p = pixel_probabilities(&mode, &grid, method)?;
            let dm = discrete_moments(&p, &grid)?;
            let renormalized = dm.d / dm.captured;
            println!(
                "  {side:>2}x{side:<2} sum p {:.6}  D/sum p {:.6} ({:+.3}%)  raw D {:.6} ({:+.3}%)",
                dm.captured,
                renormalized,
                100.0 * (renormalized - continuous) / continuous,
                dm.d,
                100.0 * (dm.d - continuous) / continuous
            );
        }
    }
    Ok(())
}
