//! Transverse mode amplitudes, mode-pixel overlaps and pixel probabilities.
//!
//! Every supported mode factorizes as `Phi(x, y) = f(x) g(y)`, so pixel
//! integrals reduce to products of one-dimensional integrals over the column
//! and row intervals. Amplitudes are real: the detector sits in a fixed
//! transverse plane and no propagation phase is modeled.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::PixelGrid;
use crate::quadrature::{self, DEFAULT_REL_TOL};

/// Tolerance allowed on `sum p > 1` before the probabilities are rejected.
pub const OVERFLOW_TOL: f64 = 1e-9;

/// A classical transverse mode amplitude, L2-normalized over the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SpatialMode {
    /// TEM00 with waist `w`: `|Phi|^2 = 2/(pi w^2) exp(-2 r^2 / w^2)`.
    FundamentalGaussian { waist: f64, x0: f64, y0: f64 },
    /// Hermite-Gauss `HG(n, m)`, `n` along x and `m` along y.
    HermiteGauss {
        n: u32,
        m: u32,
        waist: f64,
        x0: f64,
        y0: f64,
    },
    /// Constant amplitude over `[-L, L]^2`, zero outside.
    UniformPlane { half_width: f64 },
}

/// How pixel probabilities are derived from the mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityMethod {
    /// `p = |U|^2 / d^2`, with `U` the amplitude integrated over the pixel.
    #[default]
    Amplitude,
    /// `p = integral of |Phi|^2` over the pixel.
    Intensity,
}

impl std::fmt::Display for ProbabilityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Amplitude => "amplitude",
            Self::Intensity => "intensity",
        })
    }
}

impl std::str::FromStr for ProbabilityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" => Ok(Self::Amplitude),
            "intensity" => Ok(Self::Intensity),
            other => Err(invalid(format!("unknown probability method `{other}`"))),
        }
    }
}

/// Per-pixel detection probabilities plus the escape bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelProbabilities {
    pixels: Vec<f64>,
    escape: f64,
}

impl PixelProbabilities {
    /// Wraps raw pixel probabilities; the escape bin takes `1 - sum p`.
    pub fn new(pixels: Vec<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(invalid("at least one pixel probability is required"));
        }
        if let Some(bad) = pixels.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(invalid(format!("pixel probability {bad} is not a nonnegative number")));
        }
        let total = neumaier_sum(pixels.iter().copied());
        if total > 1.0 + OVERFLOW_TOL {
            return Err(Error::Inconsistent(format!(
                "pixel probabilities sum to {total}, exceeding 1"
            )));
        }
        Ok(Self {
            pixels,
            escape: (1.0 - total).max(0.0),
        })
    }

    /// Probabilities in slot order (`nu - 1`).
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn escape(&self) -> f64 {
        self.escape
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// `sum p`, the fraction of photons that land on some pixel.
    pub fn captured(&self) -> f64 {
        neumaier_sum(self.pixels.iter().copied())
    }

    /// Conditional probabilities `p / sum p` (no escape bin).
    pub fn renormalized(&self) -> Result<Self> {
        let s = self.captured();
        if s <= 0.0 {
            return Err(Error::NumericalFailure(
                "cannot renormalize pixel probabilities with zero total".into(),
            ));
        }
        Ok(Self {
            pixels: self.pixels.iter().map(|p| p / s).collect(),
            escape: 0.0,
        })
    }
}

/// Compensated summation.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// One factor of a separable mode.
#[derive(Debug, Clone, Copy, PartialEq)]
enum AxisProfile {
    Hermite { order: u32, waist: f64, center: f64 },
    Flat { half_width: f64 },
}

impl AxisProfile {
    fn value(&self, t: f64) -> f64 {
        match *self {
            AxisProfile::Hermite { order, waist, center } => {
                let u = t - center;
                hermite_norm(order, waist) * hermite(order, SQRT_2 * u / waist) * (-(u * u) / (waist * waist)).exp()
            }
            AxisProfile::Flat { half_width } => {
                if t.abs() <= half_width {
                    1.0 / (2.0 * half_width).sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    /// Integral of the amplitude factor over `[a, b]`.
    fn amplitude_integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            AxisProfile::Hermite { order, waist, center } => {
                let sa = (a - center) / waist;
                let sb = (b - center) / waist;
                hermite_norm(order, waist) * waist * hermite_gauss_integral(order, sa, sb)
            }
            AxisProfile::Flat { half_width } => {
                interval_overlap(a, b, half_width) / (2.0 * half_width).sqrt()
            }
        }
    }

    /// Integral of the squared amplitude factor over `[a, b]`.
    fn intensity_integral(&self, a: f64, b: f64) -> Result<f64> {
        match *self {
            AxisProfile::Hermite { order: 0, waist, center } => {
                Ok(0.5 * erf_diff(SQRT_2 * (a - center) / waist, SQRT_2 * (b - center) / waist))
            }
            AxisProfile::Hermite { .. } => {
                quadrature::integrate(|t| self.value(t).powi(2), a, b, DEFAULT_REL_TOL)
            }
            AxisProfile::Flat { half_width } => Ok(interval_overlap(a, b, half_width) / (2.0 * half_width)),
        }
    }

    /// Raw moments `(E[t], E[t^2], E[t^4])` of the intensity factor.
    fn moments(&self) -> (f64, f64, f64) {
        match *self {
            AxisProfile::Hermite { order, waist, center } => {
                // Harmonic-oscillator moments in xi = sqrt(2) t / w.
                let n = order as f64;
                let c2 = waist * waist / 2.0 * (n + 0.5);
                let c4 = waist.powi(4) / 4.0 * 0.75 * (2.0 * n * n + 2.0 * n + 1.0);
                let x0 = center;
                (x0, x0 * x0 + c2, x0.powi(4) + 6.0 * x0 * x0 * c2 + c4)
            }
            AxisProfile::Flat { half_width } => {
                let l = half_width;
                (0.0, l * l / 3.0, l.powi(4) / 5.0)
            }
        }
    }
}

fn interval_overlap(a: f64, b: f64, half_width: f64) -> f64 {
    (b.min(half_width) - a.max(-half_width)).max(0.0)
}

/// `(2/pi)^(1/4) / sqrt(2^n n! w)`.
fn hermite_norm(order: u32, waist: f64) -> f64 {
    let log_fact = libm::lgamma(order as f64 + 1.0);
    (0.25 * (2.0 / PI).ln() - 0.5 * (order as f64 * 2f64.ln() + log_fact + waist.ln())).exp()
}

/// Physicists' Hermite polynomial `H_n(t)`.
pub(crate) fn hermite(order: u32, t: f64) -> f64 {
    let mut prev = 1.0;
    if order == 0 {
        return prev;
    }
    let mut cur = 2.0 * t;
    for k in 1..order {
        let next = 2.0 * t * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `erf(b) - erf(a)` without cancellation in the tails.
fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if a <= 0.0 && b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

/// `H_k(sqrt(2) s) exp(-s^2)`, zero at infinity.
fn boundary_term(k: u32, s: f64) -> f64 {
    if !s.is_finite() {
        return 0.0;
    }
    hermite(k, SQRT_2 * s) * (-s * s).exp()
}

/// Definite integral of `H_n(sqrt(2) s) exp(-s^2)` over `[sa, sb]`.
///
/// Uses `J_n = -sqrt(2) [H_{n-1}(sqrt(2) s) e^{-s^2}] + 2 (n - 1) J_{n-2}`
/// with `J_0 = sqrt(pi)/2 [erf]` and `J_1 = -sqrt(2) [e^{-s^2}]`.
fn hermite_gauss_integral(order: u32, sa: f64, sb: f64) -> f64 {
    let j0 = 0.5 * PI.sqrt() * erf_diff(sa, sb);
    let j1 = -SQRT_2 * (boundary_term(0, sb) - boundary_term(0, sa));
    match order {
        0 => j0,
        1 => j1,
        _ => {
            let (mut j_prev2, mut j_prev) = (j0, j1);
            for n in 2..=order {
                let jn = -SQRT_2 * (boundary_term(n - 1, sb) - boundary_term(n - 1, sa))
                    + 2.0 * (n - 1) as f64 * j_prev2;
                j_prev2 = j_prev;
                j_prev = jn;
            }
            j_prev
        }
    }
}

impl SpatialMode {
    pub fn gaussian(waist: f64) -> Result<Self> {
        Self::gaussian_at(waist, 0.0, 0.0)
    }

    pub fn gaussian_at(waist: f64, x0: f64, y0: f64) -> Result<Self> {
        check_waist(waist)?;
        check_offset(x0, y0)?;
        Ok(Self::FundamentalGaussian { waist, x0, y0 })
    }

    pub fn hermite_gauss(n: u32, m: u32, waist: f64) -> Result<Self> {
        Self::hermite_gauss_at(n, m, waist, 0.0, 0.0)
    }

    pub fn hermite_gauss_at(n: u32, m: u32, waist: f64, x0: f64, y0: f64) -> Result<Self> {
        check_waist(waist)?;
        check_offset(x0, y0)?;
        if n > 60 || m > 60 {
            return Err(invalid("Hermite-Gauss orders above 60 are not supported"));
        }
        Ok(Self::HermiteGauss { n, m, waist, x0, y0 })
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid(format!("uniform mode half-width must be positive, got {half_width}")));
        }
        Ok(Self::UniformPlane { half_width })
    }

    /// Checks parameters of a value that bypassed the constructors (e.g. deserialized).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::FundamentalGaussian { waist, x0, y0 } => Self::gaussian_at(waist, x0, y0).map(|_| ()),
            Self::HermiteGauss { n, m, waist, x0, y0 } => {
                Self::hermite_gauss_at(n, m, waist, x0, y0).map(|_| ())
            }
            Self::UniformPlane { half_width } => Self::uniform(half_width).map(|_| ()),
        }
    }

    fn axes(&self) -> (AxisProfile, AxisProfile) {
        match *self {
            Self::FundamentalGaussian { waist, x0, y0 } => (
                AxisProfile::Hermite { order: 0, waist, center: x0 },
                AxisProfile::Hermite { order: 0, waist, center: y0 },
            ),
            Self::HermiteGauss { n, m, waist, x0, y0 } => (
                AxisProfile::Hermite { order: n, waist, center: x0 },
                AxisProfile::Hermite { order: m, waist, center: y0 },
            ),
            Self::UniformPlane { half_width } => (
                AxisProfile::Flat { half_width },
                AxisProfile::Flat { half_width },
            ),
        }
    }

    /// `Phi(x, y)`.
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        let (fx, fy) = self.axes();
        fx.value(x) * fy.value(y)
    }

    /// `|Phi(x, y)|^2`.
    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        self.amplitude(x, y).powi(2)
    }

    /// Intensity moments over the whole plane.
    pub fn continuous_moments(&self) -> PlaneMoments {
        let (fx, fy) = self.axes();
        let (gx, x2, x4) = fx.moments();
        let (gy, y2, y4) = fy.moments();
        PlaneMoments {
            d: x2 + y2,
            f: x4 + 2.0 * x2 * y2 + y4,
            d_x: x2,
            d_y: y2,
            g_x: gx,
            g_y: gy,
        }
    }
}

/// Moments of `|Phi|^2` over the plane: `D = E[r^2]`, `F = E[r^4]`,
/// `D_x = E[x^2]`, `G_x = E[x]` and y analogs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneMoments {
    pub d: f64,
    pub f: f64,
    pub d_x: f64,
    pub d_y: f64,
    pub g_x: f64,
    pub g_y: f64,
}

fn check_waist(waist: f64) -> Result<()> {
    if !(waist > 0.0 && waist.is_finite()) {
        return Err(invalid(format!("waist must be positive, got {waist}")));
    }
    Ok(())
}

fn check_offset(x0: f64, y0: f64) -> Result<()> {
    if !(x0.is_finite() && y0.is_finite()) {
        return Err(invalid("mode center must be finite"));
    }
    Ok(())
}

/// Mode-pixel superposition coefficient `U_nu`: the amplitude integrated
/// over pixel `nu` (1-based cumulative index).
pub fn overlap_coefficient(mode: &SpatialMode, grid: &PixelGrid, nu: usize) -> Result<f64> {
    let b = grid.bounds_of(nu)?;
    let (fx, fy) = mode.axes();
    Ok(fx.amplitude_integral(b.x0, b.x1) * fy.amplitude_integral(b.y0, b.y1))
}

/// All overlap coefficients in slot order.
pub fn overlap_coefficients(mode: &SpatialMode, grid: &PixelGrid) -> Vec<f64> {
    let (cols, rows) = axis_integrals(mode, grid, |axis, a, b| Ok(axis.amplitude_integral(a, b)))
        .expect("amplitude integrals are closed form");
    outer(&cols, &rows)
}

/// Pixel probabilities for `mode` on `grid`.
pub fn pixel_probabilities(
    mode: &SpatialMode,
    grid: &PixelGrid,
    method: ProbabilityMethod,
) -> Result<PixelProbabilities> {
    let p = match method {
        ProbabilityMethod::Amplitude => {
            let d2 = grid.pixel_size().powi(2);
            overlap_coefficients(mode, grid)
                .into_iter()
                .map(|u| u * u / d2)
                .collect()
        }
        ProbabilityMethod::Intensity => {
            let (cols, rows) = axis_integrals(mode, grid, |axis, a, b| axis.intensity_integral(a, b))?;
            outer(&cols, &rows)
        }
    };
    PixelProbabilities::new(p)
}

/// Column integrals (over x intervals, indexed by `i`) and row integrals
/// (over y intervals, indexed by `j`).
fn axis_integrals(
    mode: &SpatialMode,
    grid: &PixelGrid,
    integral: impl Fn(&AxisProfile, f64, f64) -> Result<f64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (fx, fy) = mode.axes();
    let h = 0.5 * grid.pixel_size();
    let side = grid.side();
    let mut cols = Vec::with_capacity(side);
    let mut rows = Vec::with_capacity(side);
    for k in 1..=side {
        let x = grid.x_center(k);
        cols.push(integral(&fx, x - h, x + h)?);
        let y = grid.y_center(k);
        rows.push(integral(&fy, y - h, y + h)?);
    }
    Ok((cols, rows))
}

fn outer(cols: &[f64], rows: &[f64]) -> Vec<f64> {
    cols.iter()
        .flat_map(|c| rows.iter().map(move |r| c * r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn gaussian_peak_intensity() {
        let w = 1.7;
        let m = SpatialMode::gaussian(w).unwrap();
        assert!(close(m.intensity(0.0, 0.0), 2.0 / (PI * w * w), 1e-14));
        let off = SpatialMode::gaussian_at(w, 0.3, -0.2).unwrap();
        assert!(close(off.intensity(0.3, -0.2), 2.0 / (PI * w * w), 1e-14));
        let r2: f64 = 0.4 * 0.4 + 0.9 * 0.9;
        assert!(close(
            m.intensity(0.4, 0.9),
            2.0 / (PI * w * w) * (-2.0 * r2 / (w * w)).exp(),
            1e-14
        ));
    }

    #[test]
    fn uniform_intensity_inside_and_outside() {
        let m = SpatialMode::uniform(5.0).unwrap();
        assert!(close(m.intensity(1.0, -3.0), 1.0 / 100.0, 1e-14));
        assert_eq!(m.intensity(5.5, 0.0), 0.0);
    }

    #[test]
    fn odd_mode_has_nodal_line() {
        let m = SpatialMode::hermite_gauss(1, 0, 2.0).unwrap();
        assert_eq!(m.amplitude(0.0, 0.7), 0.0);
    }

    #[test]
    fn hermite_polynomials() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(2, 1.5), 4.0 * 2.25 - 2.0);
        assert!(close(hermite(3, 0.7), 8.0 * 0.343 - 12.0 * 0.7, 1e-14));
    }

    #[test]
    fn hermite_gauss_integrals_match_quadrature() {
        for order in 0..8 {
            let axis = AxisProfile::Hermite { order, waist: 1.3, center: 0.2 };
            for (a, b) in [(-0.5, 0.5), (0.1, 1.9), (-3.0, -1.2), (2.0, 4.0)] {
                let closed = axis.amplitude_integral(a, b);
                let quad = quadrature::integrate(|t| axis.value(t), a, b, 1e-12).unwrap();
                assert!(
                    (closed - quad).abs() < 1e-11,
                    "order {order} [{a}, {b}]: {closed} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn modes_are_normalized() {
        for mode in [
            SpatialMode::gaussian_at(1.1, 0.4, 0.0).unwrap(),
            SpatialMode::hermite_gauss(2, 3, 0.9).unwrap(),
        ] {
            let (fx, fy) = mode.axes();
            let nx = quadrature::integrate(|t| fx.value(t).powi(2), -20.0, 20.0, 1e-12).unwrap();
            let ny = quadrature::integrate(|t| fy.value(t).powi(2), -20.0, 20.0, 1e-12).unwrap();
            assert!(close(nx * ny, 1.0, 1e-10));
        }
    }

    #[test]
    fn uniform_overlap_is_constant() {
        let grid = PixelGrid::new(5, 1.0).unwrap();
        let mode = SpatialMode::uniform(grid.half_width()).unwrap();
        for nu in 1..=grid.len() {
            let u = overlap_coefficient(&mode, &grid, nu).unwrap();
            assert!(close(u, 1.0 / (2.0 * 5.0), 1e-14));
        }
        for method in [ProbabilityMethod::Amplitude, ProbabilityMethod::Intensity] {
            let p = pixel_probabilities(&mode, &grid, method).unwrap();
            assert!(p.pixels().iter().all(|&v| close(v, 0.01, 1e-13)));
            assert!(p.escape() < 1e-12);
        }
    }

    #[test]
    fn overlap_mirror_symmetry() {
        let grid = PixelGrid::new(5, 1.0).unwrap();
        let mode = SpatialMode::gaussian(2.0).unwrap();
        let side = grid.side();
        for i in 1..=side {
            for j in 1..=side {
                let u = overlap_coefficient(&mode, &grid, grid.cumulative_index(i, j).unwrap()).unwrap();
                let mirrored = grid.cumulative_index(i, side + 1 - j).unwrap();
                assert_eq!(u, overlap_coefficient(&mode, &grid, mirrored).unwrap());
            }
        }
    }

    #[test]
    fn overlap_out_of_range() {
        let grid = PixelGrid::new(2, 1.0).unwrap();
        let mode = SpatialMode::gaussian(1.0).unwrap();
        assert!(overlap_coefficient(&mode, &grid, 0).is_err());
        assert!(overlap_coefficient(&mode, &grid, 17).is_err());
    }

    #[test]
    fn single_large_pixel_captures_beam() {
        let grid = PixelGrid::new(1, 40.0).unwrap();
        let mode = SpatialMode::gaussian(1.0).unwrap();
        let p = pixel_probabilities(&mode, &grid, ProbabilityMethod::Intensity).unwrap();
        assert!((p.captured() - 1.0).abs() < 1e-12);
        assert!(p.escape() < 1e-12);
    }

    #[test]
    fn probabilities_reject_overflow() {
        assert!(matches!(
            PixelProbabilities::new(vec![0.6, 0.5]),
            Err(Error::Inconsistent(_))
        ));
        assert!(PixelProbabilities::new(vec![0.5, -0.1]).is_err());
        assert!(PixelProbabilities::new(vec![]).is_err());
        let p = PixelProbabilities::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(p.escape(), 0.25);
    }

    #[test]
    fn hermite_gauss_moments_match_quadrature() {
        let mode = SpatialMode::hermite_gauss_at(2, 1, 1.5, 0.3, -0.4).unwrap();
        let (fx, _) = mode.axes();
        let m1 = quadrature::integrate(|t| t * fx.value(t).powi(2), -15.0, 15.0, 1e-12).unwrap();
        let m2 = quadrature::integrate(|t| t * t * fx.value(t).powi(2), -15.0, 15.0, 1e-12).unwrap();
        let m4 = quadrature::integrate(|t| t.powi(4) * fx.value(t).powi(2), -15.0, 15.0, 1e-12).unwrap();
        let (g, x2, x4) = fx.moments();
        assert!(close(g, m1, 1e-9));
        assert!(close(x2, m2, 1e-9));
        assert!(close(x4, m4, 1e-9));
    }

    #[test]
    fn fundamental_gaussian_plane_moments() {
        let w = 2.0;
        let m = SpatialMode::gaussian(w).unwrap().continuous_moments();
        assert!(close(m.d, w * w / 2.0, 1e-15));
        assert!(close(m.f, w.powi(4) / 2.0, 1e-15));
        assert_eq!(m.g_x, 0.0);
        assert!(close(m.f / (m.d * m.d), 2.0, 1e-15));
    }
}
