//! Detector model, exact count distributions and Monte Carlo frames.
//!
//! The exact evaluators in [`ExactInstance`] are small-instance oracles. They
//! are generic over the number type so the same code runs on `f64` and on
//! exact rationals. Frame sampling draws the total photon number, spreads it
//! multinomially over the pixels and the escape bin, thins every pixel
//! binomially with the efficiency and adds Poisson dark counts.

use num_traits::{FromPrimitive, Num};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::modes::PixelProbabilities;
use crate::photon_stats::{check_probability, PhotonNumberDistribution};

/// Largest pixel count the exact oracles accept.
pub const ORACLE_MAX_PIXELS: usize = 4;
/// Largest observed total count the exact oracles accept.
pub const ORACLE_MAX_COUNT: u64 = 12;
/// Largest truncated tail the exact oracles tolerate.
pub const ORACLE_MAX_TAIL: f64 = 1e-10;

/// Detection efficiency and dark-count parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// `eta = |tau|^2`.
    pub efficiency: f64,
    /// Dark counts per second over the whole detector.
    pub dark_rate: f64,
    /// Exposure time per frame in seconds.
    pub exposure: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, dark_rate: f64, exposure: f64) -> Result<Self> {
        let det = Self {
            efficiency,
            dark_rate,
            exposure,
        };
        det.validate()?;
        Ok(det)
    }

    /// Lossless, dark-count free detector.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_rate: 0.0,
            exposure: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.efficiency, "detection efficiency")?;
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(invalid(format!("dark rate must be nonnegative, got {}", self.dark_rate)));
        }
        if !(self.exposure > 0.0 && self.exposure.is_finite()) {
            return Err(invalid(format!("exposure must be positive, got {}", self.exposure)));
        }
        Ok(())
    }

    /// Beamsplitter reflectance `|rho|^2 = 1 - eta`.
    pub fn loss(&self) -> f64 {
        1.0 - self.efficiency
    }

    /// Mean dark counts per pixel and frame: the detector-wide rate times the
    /// exposure, split evenly over `pixels`.
    pub fn dark_mean_per_pixel(&self, pixels: usize) -> f64 {
        self.dark_rate * self.exposure / pixels as f64
    }
}

/// One detection event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameCounts {
    /// Registered counts per pixel, slot order.
    pub counts: Vec<u32>,
    /// Photons lost at each pixel's beamsplitter (oracle mode only).
    pub missed: Option<Vec<u32>>,
    /// Photons that landed in the escape bin.
    pub escaped: u64,
    /// Total photon number drawn from the state.
    pub photons: u64,
}

impl FrameCounts {
    /// `sum n`.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Samples frames for a fixed state, probability map and detector.
#[derive(Debug, Clone)]
pub struct FrameSampler {
    dist: PhotonNumberDistribution,
    /// `p_nu / (p_nu + ... + p_N + p_esc)`: sequential binomial splits.
    split: Vec<f64>,
    efficiency: f64,
    dark: Option<Poisson<f64>>,
}

impl FrameSampler {
    pub fn new(
        dist: PhotonNumberDistribution,
        probs: &PixelProbabilities,
        detector: &DetectorModel,
    ) -> Result<Self> {
        detector.validate()?;
        let p = probs.pixels();
        let mut suffix = probs.escape();
        let mut split = vec![0.0; p.len()];
        for k in (0..p.len()).rev() {
            suffix += p[k];
            split[k] = if suffix > 0.0 { (p[k] / suffix).min(1.0) } else { 0.0 };
        }
        let dark_mean = detector.dark_mean_per_pixel(p.len());
        let dark = if dark_mean > 0.0 {
            Some(Poisson::new(dark_mean).map_err(|e| invalid(format!("dark-count mean: {e}")))?)
        } else {
            None
        };
        Ok(Self {
            dist,
            split,
            efficiency: detector.efficiency,
            dark,
        })
    }

    pub fn pixels(&self) -> usize {
        self.split.len()
    }

    pub fn distribution(&self) -> &PhotonNumberDistribution {
        &self.dist
    }

    /// Draws one frame; `keep_missed` retains the per-pixel lost photons.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, keep_missed: bool) -> FrameCounts {
        let photons = self.dist.sample_total(rng);
        let mut counts = vec![0u32; self.split.len()];
        let mut remaining = photons;
        for (slot, &q) in self.split.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let k = draw_binomial(rng, remaining, q);
            counts[slot] = k as u32;
            remaining -= k;
        }
        let escaped = remaining;

        let mut missed = keep_missed.then(|| vec![0u32; counts.len()]);
        if self.efficiency < 1.0 {
            for (slot, c) in counts.iter_mut().enumerate() {
                if *c == 0 {
                    continue;
                }
                let kept = draw_binomial(rng, *c as u64, self.efficiency) as u32;
                if let Some(m) = missed.as_mut() {
                    m[slot] = *c - kept;
                }
                *c = kept;
            }
        }

        if let Some(dark) = &self.dark {
            for c in counts.iter_mut() {
                *c += dark.sample(rng) as u32;
            }
        }

        FrameCounts {
            counts,
            missed,
            escaped,
            photons,
        }
    }
}

fn draw_binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if p <= 0.0 || n == 0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
    }
}

/// Convenience wrapper around [`FrameSampler`].
pub fn sample_frame<R: Rng + ?Sized>(
    dist: &PhotonNumberDistribution,
    probs: &PixelProbabilities,
    detector: &DetectorModel,
    rng: &mut R,
) -> Result<FrameCounts> {
    Ok(FrameSampler::new(dist.clone(), probs, detector)?.sample(rng, false))
}

/// Number types the exact oracles can run on.
pub trait Exact: Clone + Num + FromPrimitive + PartialOrd {}
impl<T: Clone + Num + FromPrimitive + PartialOrd> Exact for T {}

/// A small instance for exact pmf evaluation.
///
/// `weights[k] = w_k` for `k = 0..=cutoff`; `tail` is the weight mass beyond
/// the cutoff, used only for the refusal guard.
#[derive(Debug, Clone)]
pub struct ExactInstance<T> {
    weights: Vec<T>,
    pixels: Vec<T>,
    escape: T,
    tail: f64,
}

impl ExactInstance<f64> {
    /// Builds an `f64` instance from a truncated distribution.
    pub fn from_distribution(dist: &PhotonNumberDistribution, probs: &PixelProbabilities) -> Result<Self> {
        let mut inst = Self::new(dist.weights().to_vec(), probs.pixels().to_vec())?;
        inst.escape = probs.escape();
        inst.tail = dist.tail_mass();
        inst.check_tail()?;
        Ok(inst)
    }
}

impl<T: Exact> ExactInstance<T> {
    /// Exact weights (complete: no tail) and pixel probabilities; the escape
    /// probability is `1 - sum p`.
    pub fn new(weights: Vec<T>, pixels: Vec<T>) -> Result<Self> {
        if pixels.is_empty() || pixels.len() > ORACLE_MAX_PIXELS {
            return Err(Error::OracleGuard(format!(
                "{} pixels; the exact evaluator handles 1..={ORACLE_MAX_PIXELS}",
                pixels.len()
            )));
        }
        if weights.is_empty() {
            return Err(invalid("weight table is empty"));
        }
        let total = pixels.iter().cloned().fold(T::zero(), |a, b| a + b);
        if pixels.iter().any(|p| *p < T::zero()) || total > T::one() {
            return Err(invalid("pixel probabilities must be nonnegative and sum to at most 1"));
        }
        Ok(Self {
            weights,
            pixels,
            escape: T::one() - total,
            tail: 0.0,
        })
    }

    pub fn pixels(&self) -> usize {
        self.pixels.len()
    }

    /// Largest photon number with a stored weight.
    pub fn cutoff(&self) -> u64 {
        (self.weights.len() - 1) as u64
    }

    fn check_tail(&self) -> Result<()> {
        if self.tail > ORACLE_MAX_TAIL {
            return Err(Error::OracleGuard(format!(
                "truncated weight tail {:e} exceeds {ORACLE_MAX_TAIL:e}",
                self.tail
            )));
        }
        Ok(())
    }

    fn check_counts(&self, n: &[u32]) -> Result<u64> {
        if n.len() != self.pixels.len() {
            return Err(invalid(format!(
                "count vector has {} entries for {} pixels",
                n.len(),
                self.pixels.len()
            )));
        }
        let total: u64 = n.iter().map(|&c| c as u64).sum();
        if total > ORACLE_MAX_COUNT {
            return Err(Error::OracleGuard(format!(
                "total count {total} exceeds {ORACLE_MAX_COUNT}"
            )));
        }
        Ok(total)
    }

    fn weight(&self, k: u64) -> T {
        self.weights.get(k as usize).cloned().unwrap_or_else(T::zero)
    }

    /// Ideal-detector pmf `P(n)`, summed over the unobserved escape count:
    ///
    /// `sum_e w_{N+e} (N+e)! / (n_1! ... n_N! e!) prod p^n p_esc^e`.
    ///
    /// For the all-zero frame and `p_esc = 0` this is `w_0`.
    pub fn ideal_pmf(&self, n: &[u32]) -> Result<T> {
        let observed = self.check_counts(n)?;
        let mut base = T::one();
        for (p, &c) in self.pixels.iter().zip(n) {
            base = base * pow(p.clone(), c as u64) / factorial::<T>(c as u64);
        }
        let mut acc = T::zero();
        for e in 0..=self.cutoff().saturating_sub(observed) {
            let total = observed + e;
            let term = self.weight(total) * factorial::<T>(total) / factorial::<T>(e)
                * pow(self.escape.clone(), e);
            acc = acc + term * base.clone();
        }
        Ok(acc)
    }

    /// Joint pmf of counted `n` and missed `m` photons behind per-pixel
    /// beamsplitters of transmittance `eta`:
    ///
    /// `w_D D! prod T^n / n! R^m / m!`, `T = eta p`, `R = (1 - eta) p`,
    /// `D = sum n + sum m`, with escaped photons summed out.
    pub fn lossy_joint_pmf(&self, eta: T, n: &[u32], m: &[u32]) -> Result<T> {
        self.check_eta(&eta)?;
        self.check_counts(n)?;
        if m.len() != self.pixels.len() {
            return Err(invalid("missed-count vector length differs from pixel count"));
        }
        let seen: u64 = n.iter().chain(m).map(|&c| c as u64).sum();
        let loss = T::one() - eta.clone();
        let mut base = T::one();
        for ((p, &nc), &mc) in self.pixels.iter().zip(n).zip(m) {
            let t = eta.clone() * p.clone();
            let r = loss.clone() * p.clone();
            base = base * pow(t, nc as u64) / factorial::<T>(nc as u64) * pow(r, mc as u64)
                / factorial::<T>(mc as u64);
        }
        let mut acc = T::zero();
        for e in 0..=self.cutoff().saturating_sub(seen) {
            let d = seen + e;
            acc = acc
                + self.weight(d) * factorial::<T>(d) / factorial::<T>(e)
                    * pow(self.escape.clone(), e)
                    * base.clone();
        }
        Ok(acc)
    }

    /// Observed-count pmf: the joint pmf traced over every missed-count vector
    /// inside the truncation window.
    pub fn lossy_marginal_pmf(&self, eta: T, n: &[u32]) -> Result<T> {
        self.check_tail()?;
        let observed = self.check_counts(n)?;
        let budget = self.cutoff().saturating_sub(observed);
        let mut acc = T::zero();
        let mut m = vec![0u32; self.pixels.len()];
        for_each_composition(&mut m, 0, budget, &mut |m| {
            // lossy_joint_pmf cannot fail here: all checks already passed.
            acc = acc.clone() + self.lossy_joint_pmf(eta.clone(), n, m).expect("validated");
        });
        Ok(acc)
    }

    /// Observed-count pmf by per-photon routing: each photon independently
    /// reaches and is registered by pixel `nu` with probability `eta p_nu`,
    /// otherwise it is lost.
    pub fn thinned_pmf(&self, eta: T, n: &[u32]) -> Result<T> {
        self.check_eta(&eta)?;
        let observed = self.check_counts(n)?;
        let captured = self.pixels.iter().cloned().fold(T::zero(), |a, b| a + b);
        let lost = T::one() - eta.clone() * captured;
        let mut base = T::one();
        for (p, &c) in self.pixels.iter().zip(n) {
            base = base * pow(eta.clone() * p.clone(), c as u64) / factorial::<T>(c as u64);
        }
        let mut acc = T::zero();
        for total in observed..=self.cutoff() {
            let k = total - observed;
            acc = acc
                + self.weight(total) * factorial::<T>(total) / factorial::<T>(k)
                    * pow(lost.clone(), k)
                    * base.clone();
        }
        Ok(acc)
    }

    fn check_eta(&self, eta: &T) -> Result<()> {
        if *eta < T::zero() || *eta > T::one() {
            return Err(invalid("efficiency must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Calls `f` on every vector `v` with `v[k..]` ranging over all nonnegative
/// integer vectors of total at most `budget`.
fn for_each_composition(v: &mut Vec<u32>, k: usize, budget: u64, f: &mut impl FnMut(&Vec<u32>)) {
    if k == v.len() {
        f(v);
        return;
    }
    for c in 0..=budget {
        v[k] = c as u32;
        for_each_composition(v, k + 1, budget - c, f);
    }
    v[k] = 0;
}

/// All count vectors over `pixels` pixels with total at most `max_total`.
pub fn count_vectors(pixels: usize, max_total: u64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut v = vec![0u32; pixels];
    for_each_composition(&mut v, 0, max_total, &mut |v| out.push(v.clone()));
    out
}

fn pow<T: Exact>(base: T, exp: u64) -> T {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

fn factorial<T: Exact>(n: u64) -> T {
    let mut acc = T::one();
    for k in 2..=n {
        acc = acc * T::from_u64(k).expect("small integer");
    }
    acc
}
