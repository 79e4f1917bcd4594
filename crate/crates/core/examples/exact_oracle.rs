//! Exact count pmfs in rational arithmetic, checked against sampled frames.
//!
//! `cargo run --example exact_oracle`

use std::collections::HashMap;

use multipixel::detector::count_vectors;
use multipixel::prelude::*;
use num_rational::Rational64;

fn main() -> multipixel::Result<()> {
    let r = |a, b| Rational64::new(a, b);

    // Fock |2> on two pixels with p = (1/2, 1/2), efficiency 1/2.
    let inst = ExactInstance::new(vec![r(0, 1), r(0, 1), r(1, 1)], vec![r(1, 2), r(1, 2)])?;
    println!("n       traced joint  thinned");
    for n in count_vectors(2, 2) {
        let traced = inst.lossy_marginal_pmf(r(1, 2), &n)?;
        let thinned = inst.thinned_pmf(r(1, 2), &n)?;
        assert_eq!(traced, thinned);
        println!("{n:?}  {traced:>11}  {thinned:>8}");
    }

    let frames = 200_000;
    let probs = PixelProbabilities::new(vec![0.5, 0.5])?;
    let detector = DetectorModel::new(0.5, 0.0, 1.0)?;
    let sampler = FrameSampler::new(PhotonNumberDistribution::new(PhotonState::fock(2)), &probs, &detector)?;
    let stream = Substream::new(42);
    let mut hist: HashMap<Vec<u32>, u64> = HashMap::new();
    for k in 0..frames {
        *hist.entry(sampler.sample(&mut stream.frame_rng(k), false).counts).or_default() += 1;
    }
    let exact = ExactInstance::new(vec![0.0, 0.0, 1.0], vec![0.5, 0.5])?;
    let mut tv = 0.0;
    for n in count_vectors(2, 2) {
        let empirical = *hist.get(&n).unwrap_or(&0) as f64 / frames as f64;
        tv += (empirical - exact.lossy_marginal_pmf(0.5, &n)?).abs();
    }
    println!("\ntotal variation distance over {frames} frames: {:.5}", tv / 2.0);
    Ok(())
}
