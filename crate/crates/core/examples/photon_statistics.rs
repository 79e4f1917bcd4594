//! Photon-number distributions, Mandel Q and loss.
//!
//! `cargo run --example photon_statistics`

use multipixel::prelude::*;

fn main() -> multipixel::Result<()> {
    let nbar = 4.0;
    let states = [
        ("fock", PhotonState::fock(4)),
        ("coherent", PhotonState::coherent(nbar)?),
        ("thermal", PhotonState::thermal(nbar)?),
        ("squeezed", PhotonState::squeezed_with_mean(nbar)?),
    ];

    println!("{:<10}{:>8}{:>10}{:>10}{:>8}  w_0..w_8", "state", "mean", "variance", "Q", "cutoff");
    for (name, state) in &states {
        let dist = PhotonNumberDistribution::new(*state);
        let m = dist.moments();
        let w: Vec<String> = (0..=8).map(|n| format!("{:.4}", dist.weight(n))).collect();
        println!(
            "{name:<10}{:>8.3}{:>10.3}{:>10.3}{:>8}  {}",
            m.mean,
            m.variance,
            m.q()?,
            dist.cutoff(),
            w.join(" ")
        );
    }

    println!("\nafter a detector with eta = 0.5 (Q scales with eta):");
    for (name, state) in &states {
        let m = state.moments().thinned(0.5)?;
        println!("{name:<10} mean {:.3}  Q {:.3}", m.mean, m.q()?);
    }
    Ok(())
}
