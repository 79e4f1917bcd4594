//! Pixel probabilities of a Gaussian and a Hermite-Gauss mode on a 10x10 camera.
//!
//! `cargo run --example pixel_probabilities`

use multipixel::modes::overlap_coefficient;
use multipixel::prelude::*;

fn print_map(grid: &PixelGrid, p: &PixelProbabilities) {
    let side = grid.side();
    for j in 1..=side {
        let row: Vec<String> = (1..=side)
            .map(|i| format!("{:6.4}", p.pixels()[grid.cumulative_index(i, j).unwrap() - 1]))
            .collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> multipixel::Result<()> {
    let grid = PixelGrid::new(5, 1.0)?;
    let gauss = SpatialMode::gaussian(2.0)?;

    for method in [ProbabilityMethod::Amplitude, ProbabilityMethod::Intensity] {
        let p = pixel_probabilities(&gauss, &grid, method)?;
        println!("{method}: sum p = {:.12}, escape = {:.3e}", p.captured(), p.escape());
    }

    // Pixel (i, j) = (6, 5) has its center at (0.5, 0.5).
    let nu = grid.cumulative_index(6, 5)?;
    println!("U at {:?} = {:.16}", grid.center_of(nu)?, overlap_coefficient(&gauss, &grid, nu)?);

    println!("\nGaussian w = 2, intensity method (rows are y from top to bottom):");
    print_map(&grid, &pixel_probabilities(&gauss, &grid, ProbabilityMethod::Intensity)?);

    let hg = SpatialMode::hermite_gauss(1, 0, 2.0)?;
    println!("\nHG10 w = 2 (nodal column at x = 0):");
    print_map(&grid, &pixel_probabilities(&hg, &grid, ProbabilityMethod::Intensity)?);
    Ok(())
}
