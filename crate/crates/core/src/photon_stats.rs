//! Photon-number statistics of single-mode states.
//!
//! Weights `w_N = |psi_N|^2` for Fock, coherent, thermal and squeezed-vacuum
//! states, their closed-form moments, total-photon-number sampling and the
//! moments of a binomially thinned count.
//!
//! Thermal weights use the Bose-Einstein form `n^N / (1 + n)^(N + 1)` and
//! squeezed-vacuum weights `sech s (2m)! / (4^m (m!)^2) tanh^(2m) s`; both
//! normalize to one.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tail mass left outside the truncation window.
pub const TAIL_EPS: f64 = 1e-12;

/// Standard deviations above the mean at which the window is capped.
const CAP_SIGMAS: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhotonState {
    Fock { n: u64 },
    Coherent { mean: f64 },
    Thermal { mean: f64 },
    /// Squeezing magnitude `s` and phase `theta`; the phase does not enter
    /// the photon-number weights.
    SqueezedVacuum { squeezing: f64, phase: f64 },
}

/// Mean and variance of a photon-number (or count) distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonMoments {
    pub mean: f64,
    pub variance: f64,
}

impl PhotonMoments {
    /// Mandel `Q = Var[n] / n - 1`.
    pub fn q(&self) -> Result<f64> {
        if self.mean <= 0.0 {
            return Err(Error::UndefinedQ);
        }
        Ok(self.variance / self.mean - 1.0)
    }

    /// Moments after each photon independently survives with probability `eta`:
    /// mean `eta n`, variance `eta^2 Var + eta (1 - eta) n` (`= eta n (1 + eta Q)`).
    pub fn thinned(&self, eta: f64) -> Result<PhotonMoments> {
        check_probability(eta, "efficiency")?;
        Ok(PhotonMoments {
            mean: eta * self.mean,
            variance: eta * eta * self.variance + eta * (1.0 - eta) * self.mean,
        })
    }
}

impl PhotonState {
    pub fn fock(n: u64) -> Self {
        PhotonState::Fock { n }
    }

    pub fn coherent(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(PhotonState::Coherent { mean })
    }

    pub fn thermal(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(PhotonState::Thermal { mean })
    }

    pub fn squeezed_vacuum(squeezing: f64, phase: f64) -> Result<Self> {
        if !(squeezing >= 0.0 && squeezing.is_finite() && phase.is_finite()) {
            return Err(invalid(format!(
                "squeezing must be finite and nonnegative, got s = {squeezing}, theta = {phase}"
            )));
        }
        Ok(PhotonState::SqueezedVacuum { squeezing, phase })
    }

    /// Squeezed vacuum with mean photon number `sinh^2 s = mean`.
    pub fn squeezed_with_mean(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Self::squeezed_vacuum(mean.sqrt().asinh(), 0.0)
    }

    pub fn moments(&self) -> PhotonMoments {
        match *self {
            PhotonState::Fock { n } => PhotonMoments {
                mean: n as f64,
                variance: 0.0,
            },
            PhotonState::Coherent { mean } => PhotonMoments { mean, variance: mean },
            PhotonState::Thermal { mean } => PhotonMoments {
                mean,
                variance: mean * mean + mean,
            },
            PhotonState::SqueezedVacuum { squeezing, .. } => {
                let mean = squeezing.sinh().powi(2);
                PhotonMoments {
                    mean,
                    variance: 2.0 * mean * (mean + 1.0),
                }
            }
        }
    }

    /// `ln w_N`, `-inf` where the weight vanishes.
    pub fn ln_weight(&self, n: u64) -> f64 {
        let nf = n as f64;
        match *self {
            PhotonState::Fock { n: n0 } => {
                if n == n0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            PhotonState::Coherent { mean } => {
                if mean == 0.0 {
                    return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                -mean + nf * mean.ln() - ln_factorial(n)
            }
            PhotonState::Thermal { mean } => {
                if mean == 0.0 {
                    return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                nf * mean.ln() - (nf + 1.0) * mean.ln_1p()
            }
            PhotonState::SqueezedVacuum { squeezing: s, .. } => {
                if n % 2 == 1 {
                    return f64::NEG_INFINITY;
                }
                let m = n / 2;
                if s == 0.0 {
                    return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                let mf = m as f64;
                -s.cosh().ln() + ln_factorial(n) - mf * 4f64.ln() - 2.0 * ln_factorial(m)
                    + nf * s.tanh().ln()
            }
        }
    }

    /// `w_N`.
    pub fn weight(&self, n: u64) -> f64 {
        self.ln_weight(n).exp()
    }
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

fn check_mean(mean: f64) -> Result<()> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(invalid(format!("mean photon number must be finite and nonnegative, got {mean}")));
    }
    Ok(())
}

pub(crate) fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// A photon-number distribution with its truncated weight table.
#[derive(Debug, Clone)]
pub struct PhotonNumberDistribution {
    state: PhotonState,
    weights: Vec<f64>,
    cdf: Vec<f64>,
    tail: f64,
}

/// `w_{n+stride} / w_n` for `n` on the support.
fn step_ratio(state: &PhotonState, n: u64) -> f64 {
    let nf = n as f64;
    match *state {
        PhotonState::Fock { .. } => 0.0,
        PhotonState::Coherent { mean } => mean / (nf + 1.0),
        PhotonState::Thermal { mean } => mean / (1.0 + mean),
        PhotonState::SqueezedVacuum { squeezing, .. } => (nf + 1.0) / (nf + 2.0) * squeezing.tanh().powi(2),
    }
}

/// Supremum of the step ratio beyond `n`, for the geometric tail bound.
fn ratio_bound(state: &PhotonState, n: u64) -> f64 {
    match *state {
        PhotonState::SqueezedVacuum { squeezing, .. } => squeezing.tanh().powi(2),
        _ => step_ratio(state, n),
    }
}

/// Unnormalized weights built by ratio recurrences outward from the mode,
/// which avoids the cancellation in `n ln(nbar) - ln n!` at large `n`.
/// Returns the weights and a bound on the mass beyond the window, both
/// scaled so that `sum + tail = 1`.
fn weight_table(state: &PhotonState) -> (Vec<f64>, f64) {
    let m = state.moments();
    let (start, stride) = match *state {
        PhotonState::Fock { n } => {
            let mut w = vec![0.0; n as usize + 1];
            w[n as usize] = 1.0;
            return (w, 0.0);
        }
        _ if m.mean == 0.0 => return (vec![1.0], 0.0),
        PhotonState::Coherent { mean } => (mean.floor() as u64, 1),
        PhotonState::Thermal { .. } => (0, 1),
        PhotonState::SqueezedVacuum { .. } => (0, 2),
    };
    let cap = (m.mean + CAP_SIGMAS * m.variance.sqrt() + 50.0).ceil() as u64;

    let mut u = vec![0.0; start as usize + 1];
    u[start as usize] = 1.0;
    let mut n = start;
    while n >= stride {
        let below = n - stride;
        u[below as usize] = u[n as usize] / step_ratio(state, below);
        n = below;
    }
    let mut acc = neumaier_total(&u);

    let mut n = start;
    let mut bound;
    loop {
        let un = u[n as usize];
        let rho = ratio_bound(state, n);
        bound = if rho < 1.0 { un * rho / (1.0 - rho) } else { f64::INFINITY };
        // Half the threshold leaves headroom for rounding in the final sum.
        if bound <= 0.5 * TAIL_EPS * acc || n + stride > cap {
            break;
        }
        let next = un * step_ratio(state, n);
        u.resize((n + stride) as usize + 1, 0.0);
        u[(n + stride) as usize] = next;
        acc += next;
        n += stride;
    }
    let bound = if bound.is_finite() { bound } else { 0.0 };
    let total = neumaier_total(&u) + bound;
    for w in u.iter_mut() {
        *w /= total;
    }
    (u, bound / total)
}

fn neumaier_total(values: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + c
}

impl PhotonNumberDistribution {
    pub fn new(state: PhotonState) -> Self {
        let (weights, tail) = weight_table(&state);
        let mut cdf = Vec::with_capacity(weights.len());
        let (mut acc, mut comp) = (0.0, 0.0);
        for &w in &weights {
            // Kahan-compensated running total.
            let y = w - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            cdf.push(acc);
        }
        Self {
            state,
            weights,
            cdf,
            tail,
        }
    }

    pub fn state(&self) -> PhotonState {
        self.state
    }

    pub fn moments(&self) -> PhotonMoments {
        self.state.moments()
    }

    /// Mandel Q; an error for a zero-mean state.
    pub fn q(&self) -> Result<f64> {
        self.moments().q()
    }

    /// Tabulated `w_n`; zero beyond the window.
    pub fn weight(&self, n: u64) -> f64 {
        self.weights.get(n as usize).copied().unwrap_or(0.0)
    }

    /// Largest photon number in the truncation window.
    pub fn cutoff(&self) -> u64 {
        (self.weights.len() - 1) as u64
    }

    /// `w_0 ..= w_cutoff`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability mass outside the truncation window.
    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    /// Draws a total photon number.
    pub fn sample_total<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.state {
            PhotonState::Fock { n } => n,
            PhotonState::Coherent { mean } => {
                if mean == 0.0 {
                    0
                } else {
                    Poisson::new(mean).expect("validated mean").sample(rng) as u64
                }
            }
            PhotonState::Thermal { mean } => {
                if mean == 0.0 {
                    0
                } else {
                    Geometric::new(1.0 / (1.0 + mean))
                        .expect("probability in (0, 1]")
                        .sample(rng)
                }
            }
            PhotonState::SqueezedVacuum { .. } => {
                let u: f64 = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
                self.cdf.partition_point(|&c| c <= u).min(self.weights.len() - 1) as u64
            }
        }
    }

    /// Moments of the count after binomial thinning with efficiency `eta`.
    pub fn thinned(&self, eta: f64) -> Result<PhotonMoments> {
        self.moments().thinned(eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn states() -> Vec<PhotonState> {
        vec![
            PhotonState::fock(0),
            PhotonState::fock(7),
            PhotonState::fock(1000),
            PhotonState::coherent(0.0).unwrap(),
            PhotonState::coherent(4.0).unwrap(),
            PhotonState::coherent(1e4).unwrap(),
            PhotonState::thermal(0.3).unwrap(),
            PhotonState::thermal(10.0).unwrap(),
            PhotonState::thermal(1e4).unwrap(),
            PhotonState::squeezed_vacuum(0.4, 1.0).unwrap(),
            PhotonState::squeezed_with_mean(100.0).unwrap(),
            PhotonState::squeezed_with_mean(1e4).unwrap(),
        ]
    }

    #[test]
    fn coherent_vacuum_weight() {
        let s = PhotonState::coherent(4.0).unwrap();
        assert!((s.weight(0) - (-4.0f64).exp()).abs() < 1e-17);
        assert!((s.weight(0) - 1.8316e-2).abs() < 1e-6);
    }

    #[test]
    fn fock_weights() {
        let s = PhotonState::fock(7);
        assert_eq!(s.weight(7), 1.0);
        assert_eq!(s.weight(6), 0.0);
    }

    #[test]
    fn squeezed_odd_weights_vanish() {
        for s in [0.1, 0.8, 2.5] {
            let st = PhotonState::squeezed_vacuum(s, 0.3).unwrap();
            assert_eq!(st.weight(3), 0.0);
            assert_eq!(st.weight(101), 0.0);
        }
    }

    #[test]
    fn mandel_q_closed_forms() {
        assert_eq!(PhotonState::fock(5).moments().q().unwrap(), -1.0);
        assert_eq!(PhotonState::coherent(3.0).unwrap().moments().q().unwrap(), 0.0);
        let th = PhotonState::thermal(7.0).unwrap().moments();
        assert!((th.q().unwrap() - 7.0).abs() < 1e-12);
        let sq = PhotonState::squeezed_with_mean(3.0).unwrap().moments();
        assert!((sq.q().unwrap() - 7.0).abs() < 1e-9);
        assert!(matches!(PhotonState::fock(0).moments().q(), Err(Error::UndefinedQ)));
    }

    #[test]
    fn normalization_and_brute_force_moments() {
        for st in states() {
            let d = PhotonNumberDistribution::new(st);
            let w = d.weights();
            assert!(w.iter().all(|&v| v >= 0.0));
            let total: f64 = w.iter().sum();
            assert!(total >= 1.0 - TAIL_EPS - 1e-12, "{st:?}: total {total}");
            assert!(total <= 1.0 + 1e-12);

            let m = st.moments();
            let m1: f64 = w.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
            let m2: f64 = w.iter().enumerate().map(|(n, p)| (n as f64).powi(2) * p).sum();
            let var = m2 - m1 * m1;
            assert!((m1 - m.mean).abs() <= 1e-8 * m.mean.max(1.0), "{st:?}: mean {m1} vs {}", m.mean);
            assert!(
                (var - m.variance).abs() <= 1e-8 * m.variance.max(1.0) + 1e-8 * m.mean * m.mean,
                "{st:?}: var {var} vs {}",
                m.variance
            );
        }
    }

    #[test]
    fn q_bounded_below() {
        for st in states() {
            if let Ok(q) = st.moments().q() {
                assert!(q >= -1.0);
                assert_eq!(q == -1.0, matches!(st, PhotonState::Fock { .. }));
            }
        }
    }

    #[test]
    fn fock_sampler_is_constant() {
        let d = PhotonNumberDistribution::new(PhotonState::fock(5));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| d.sample_total(&mut rng) == 5));
    }

    #[test]
    fn coherent_sample_mean() {
        let d = PhotonNumberDistribution::new(PhotonState::coherent(100.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample_total(&mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 100.0).abs() < 3.0 * 10.0 / 1000.0, "mean {mean}");
    }

    #[test]
    fn thermal_sample_variance() {
        let d = PhotonNumberDistribution::new(PhotonState::thermal(10.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample_total(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 110.0).abs() < 0.05 * 110.0, "var {var}");
    }

    #[test]
    fn squeezed_sampler_matches_table() {
        let st = PhotonState::squeezed_vacuum(0.9, 0.0).unwrap();
        let d = PhotonNumberDistribution::new(st);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 400_000;
        let mut counts = [0usize; 12];
        for _ in 0..n {
            let k = d.sample_total(&mut rng);
            assert_eq!(k % 2, 0);
            if (k as usize) < counts.len() {
                counts[k as usize] += 1;
            }
        }
        for (k, c) in counts.iter().enumerate() {
            let p = st.weight(k as u64);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() <= 4.0 * se + 1e-12, "N = {k}");
        }
    }

    #[test]
    fn thinned_moments() {
        let f = PhotonState::fock(100).moments().thinned(0.5).unwrap();
        assert_eq!(f.mean, 50.0);
        assert_eq!(f.q().unwrap(), -0.5);
        let c = PhotonState::coherent(9.0).unwrap().moments();
        assert_eq!(c.thinned(1.0).unwrap(), c);
        assert!(c.thinned(0.3).unwrap().q().unwrap().abs() < 1e-15);
        assert!(c.thinned(1.5).is_err());
    }

    #[test]
    fn thinned_fock_matches_binomial_enumeration() {
        // Thinning a point mass at 100 gives Binomial(100, 1/2).
        let n = 100u64;
        let eta: f64 = 0.5;
        let pmf: Vec<f64> = (0..=n)
            .map(|k| {
                (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
                    + k as f64 * eta.ln()
                    + (n - k) as f64 * (1.0 - eta).ln())
                .exp()
            })
            .collect();
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let var: f64 = pmf.iter().enumerate().map(|(k, p)| (k as f64 - mean).powi(2) * p).sum();
        let t = PhotonState::fock(n).moments().thinned(eta).unwrap();
        assert!((t.mean - mean).abs() < 1e-10);
        assert!((t.variance - var).abs() < 1e-10);
        assert!((t.q().unwrap() - (var / mean - 1.0)).abs() < 1e-10);
    }
}
