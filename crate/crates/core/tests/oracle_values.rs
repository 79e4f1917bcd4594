//! Frozen reference values from an independent high-precision evaluation,
//! plus brute-force Riemann sums computed here from the bare mode formula.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use multipixel::modes::overlap_coefficient;
use multipixel::prelude::*;
use multipixel::theory::continuous_predictions;

// 30-digit reference values for a w = 2 Gaussian on the 10x10, d = 1 camera.
const U_CENTER: f64 = 0.33954801999274811567922210295;
const INTENSITY_CENTER: f64 = 0.11651623566859806675453266108;
const AMPLITUDE_SUM: f64 = 0.959764520285496805667204415559;
const AMPLITUDE_D: f64 = 2.00047614819958024994747905992;
const AMPLITUDE_F: f64 = 8.3366874073128593622762838367;
const AMPLITUDE_DX: f64 = 1.00023807409979012497373952996;
const INTENSITY_SUM: f64 = 0.999998853394041159718996555686;
const INTENSITY_D: f64 = 2.16663071420607167911699294823;
const INTENSITY_F: f64 = 9.37108865116412830585419736316;
const INTENSITY_DX: f64 = 1.08331535710303583955849647411;

fn gaussian_amplitude(x: f64, y: f64, w: f64) -> f64 {
    (2.0 / PI).sqrt() / w * (-(x * x + y * y) / (w * w)).exp()
}

/// Midpoint sum of `f` over `[x0, x0 + 1] x [y0, y0 + 1]` on `n x n` points.
fn riemann(f: impl Fn(f64, f64) -> f64, x0: f64, y0: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut acc = 0.0;
    for a in 0..n {
        let x = x0 + (a as f64 + 0.5) * h;
        for b in 0..n {
            acc += f(x, y0 + (b as f64 + 0.5) * h);
        }
    }
    acc * h * h
}

fn camera() -> PixelGrid {
    PixelGrid::new(5, 1.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn center_pixel_overlap_matches_reference_and_riemann_sum() {
    let grid = camera();
    let mode = SpatialMode::gaussian(2.0).unwrap();
    let nu = grid.cumulative_index(6, 5).unwrap();
    assert_eq!(grid.center_of(nu).unwrap(), (0.5, 0.5));
    let u = overlap_coefficient(&mode, &grid, nu).unwrap();
    assert!(rel(u, U_CENTER) < 1e-13, "{u}");

    // 10^6-point brute force, independent of the library's closed forms.
    // The midpoint error is about h^2 / 24 times the curvature, ~4e-8 here;
    // one Richardson step against 500^2 points removes it.
    let amp = |x: f64, y: f64| gaussian_amplitude(x, y, 2.0);
    let int = |x: f64, y: f64| gaussian_amplitude(x, y, 2.0).powi(2);
    let brute = riemann(amp, 0.0, 0.0, 1000);
    assert!(rel(brute, U_CENTER) < 1e-7, "{brute}");
    let extrapolated = (4.0 * brute - riemann(amp, 0.0, 0.0, 500)) / 3.0;
    assert!(rel(extrapolated, U_CENTER) < 1e-11, "{extrapolated}");
    let brute_int = riemann(int, 0.0, 0.0, 1000);
    assert!(rel(brute_int, INTENSITY_CENTER) < 1e-7);
    let extrapolated = (4.0 * brute_int - riemann(int, 0.0, 0.0, 500)) / 3.0;
    assert!(rel(extrapolated, INTENSITY_CENTER) < 1e-11, "{extrapolated}");

    let p = pixel_probabilities(&mode, &grid, ProbabilityMethod::Intensity).unwrap();
    assert!(rel(p.pixels()[nu - 1], INTENSITY_CENTER) < 1e-12);
}

#[test]
fn probability_sums_and_moments_match_reference() {
    let grid = camera();
    let mode = SpatialMode::gaussian(2.0).unwrap();
    for (method, sum, d, f, dx) in [
        (ProbabilityMethod::Amplitude, AMPLITUDE_SUM, AMPLITUDE_D, AMPLITUDE_F, AMPLITUDE_DX),
        (ProbabilityMethod::Intensity, INTENSITY_SUM, INTENSITY_D, INTENSITY_F, INTENSITY_DX),
    ] {
        let p = pixel_probabilities(&mode, &grid, method).unwrap();
        let m = discrete_moments(&p, &grid).unwrap();
        assert!(rel(m.captured, sum) < 1e-12, "{method}: {}", m.captured);
        assert!(rel(p.escape(), 1.0 - sum) < 1e-6);
        assert!(rel(m.d, d) < 1e-11, "{method}: {}", m.d);
        assert!(rel(m.f, f) < 1e-11, "{method}: {}", m.f);
        assert!(rel(m.d_x, dx) < 1e-11);
        assert!(rel(m.d_y, dx) < 1e-11);
        assert!(m.g_x.abs() < 1e-14 && m.g_y.abs() < 1e-14);
    }
}

#[test]
fn amplitude_method_loses_probability_pixel_by_pixel() {
    let grid = camera();
    let mode = SpatialMode::gaussian(2.0).unwrap();
    let amp = pixel_probabilities(&mode, &grid, ProbabilityMethod::Amplitude).unwrap();
    let int = pixel_probabilities(&mode, &grid, ProbabilityMethod::Intensity).unwrap();
    for (a, i) in amp.pixels().iter().zip(int.pixels()) {
        assert!(a <= i);
    }
    assert!(amp.captured() < int.captured() && int.captured() <= 1.0);
    // Spot check two corner-adjacent pixels by brute force.
    for (i, j) in [(1, 1), (4, 7)] {
        let nu = grid.cumulative_index(i, j).unwrap();
        let b = grid.bounds_of(nu).unwrap();
        let u = riemann(|x, y| gaussian_amplitude(x, y, 2.0), b.x0, b.y0, 400);
        let q = riemann(|x, y| gaussian_amplitude(x, y, 2.0).powi(2), b.x0, b.y0, 400);
        assert!(rel(amp.pixels()[nu - 1], u * u) < 1e-5);
        assert!(rel(int.pixels()[nu - 1], q) < 1e-5);
    }
}

#[test]
fn camera_anchors() {
    let grid = camera();
    assert_eq!(grid.side(), 10);
    assert_eq!(grid.half_width(), 5.0);
    assert_eq!(grid.center(1, 1).unwrap(), (-4.5, 4.5));
    assert_eq!(grid.cumulative_index(2, 3).unwrap(), 13);
}

#[test]
fn fock_width_variance_is_f_over_d2_minus_one() {
    let grid = camera();
    let p = pixel_probabilities(&SpatialMode::gaussian(2.0).unwrap(), &grid, ProbabilityMethod::Intensity).unwrap();
    let dm = discrete_moments(&p, &grid).unwrap();
    for n in [1u64, 10, 1000] {
        let v = discrete_width_prediction(&PhotonState::fock(n).moments(), &dm, Normalization::Raw)
            .unwrap()
            .normalized_variance;
        let f_over_d2 = INTENSITY_F / (INTENSITY_D * INTENSITY_D);
        assert!(rel(v, (f_over_d2 - 1.0) / n as f64) < 1e-10);
    }
}

#[test]
fn continuous_gaussian_coherent_is_two_over_n() {
    for w in [0.5, 2.0, 7.0] {
        let mode = SpatialMode::gaussian(w).unwrap();
        let pm = mode.continuous_moments();
        assert!(rel(pm.f / (pm.d * pm.d), 2.0) < 1e-14);
        for n in [3.0, 100.0] {
            let c = continuous_predictions(&PhotonState::coherent(n).unwrap().moments(), &mode).unwrap();
            assert!(rel(c.width.normalized_variance, 2.0 / n) < 1e-14);
            for st in [PhotonState::fock(n as u64), PhotonState::thermal(n).unwrap()] {
                let v = continuous_predictions(&st.moments(), &mode).unwrap().position.variance_x;
                assert!(rel(v, pm.d_x / n) < 1e-14);
            }
        }
    }
}
