//! Closed-form width and position noise predictions.
//!
//! With pixel probabilities `p`, the multinomial moments
//! `E[n_nu] = n p_nu` and `E[n_nu n_mu] = n p_nu delta + (E[n^2] - n) p_nu p_mu`
//! give, for a state with mean `n` and Mandel parameter `Q`,
//!
//! ```text
//! Var[W] / W^2 = (Q + F / D^2) / n
//! Var[P_x]     = (D_x - G_x^2) / n + Var[n] / n^2 * G_x^2
//! ```
//!
//! with `D = sum |x|^2 p`, `F = sum |x|^4 p`, `D_x = sum x^2 p`, `G_x = sum x p`.
//!
//! When `sum p < 1` the "renormalized" predictions use `p / sum p` together
//! with the moments of the detected photon number (binomial thinning by
//! `sum p`). They describe the estimator exactly. The "raw" predictions plug
//! `p` in unchanged. The normalized width variance is the same either way;
//! the mean width and position variance differ by powers of `sum p`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PixelGrid;
use crate::modes::{neumaier_sum, PixelProbabilities, PlaneMoments, SpatialMode};
use crate::photon_stats::PhotonMoments;

/// Pixel-center moments weighted by the pixel probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteMoments {
    /// `sum |x|^2 p`.
    pub d: f64,
    /// `sum |x|^4 p`.
    pub f: f64,
    pub d_x: f64,
    pub d_y: f64,
    pub g_x: f64,
    pub g_y: f64,
    /// `sum p` over the pixels (escape bin excluded).
    pub captured: f64,
}

impl DiscreteMoments {
    /// Moments of the conditional distribution `p / sum p`.
    pub fn renormalized(&self) -> Result<Self> {
        let s = self.captured;
        if s <= 0.0 {
            return Err(Error::NumericalFailure("no probability lands on the pixels".into()));
        }
        Ok(Self {
            d: self.d / s,
            f: self.f / s,
            d_x: self.d_x / s,
            d_y: self.d_y / s,
            g_x: self.g_x / s,
            g_y: self.g_y / s,
            captured: 1.0,
        })
    }
}

/// `D`, `F`, `D_x`, `G_x` and y analogs over the pixel centers.
pub fn discrete_moments(p: &PixelProbabilities, grid: &PixelGrid) -> Result<DiscreteMoments> {
    if p.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} probabilities for {} pixels",
            p.len(),
            grid.len()
        )));
    }
    let centers = grid.centers();
    let pairs = || p.pixels().iter().zip(&centers);
    Ok(DiscreteMoments {
        d: neumaier_sum(pairs().map(|(p, (x, y))| (x * x + y * y) * p)),
        f: neumaier_sum(pairs().map(|(p, (x, y))| (x * x + y * y).powi(2) * p)),
        d_x: neumaier_sum(pairs().map(|(p, (x, _))| x * x * p)),
        d_y: neumaier_sum(pairs().map(|(p, (_, y))| y * y * p)),
        g_x: neumaier_sum(pairs().map(|(p, (x, _))| x * p)),
        g_y: neumaier_sum(pairs().map(|(p, (_, y))| y * p)),
        captured: p.captured(),
    })
}

/// Which variant of the discrete formulas to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `p / sum p` with detected-count moments.
    Renormalized,
    /// `p` as is.
    Raw,
}

/// Width noise prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthPrediction {
    pub mean: f64,
    pub variance: f64,
    pub normalized_variance: f64,
}

impl WidthPrediction {
    /// `sqrt(Var[W]) / W`.
    pub fn noise(&self) -> f64 {
        self.normalized_variance.sqrt()
    }
}

/// Position noise prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionPrediction {
    pub mean_x: f64,
    pub mean_y: f64,
    pub variance_x: f64,
    pub variance_y: f64,
}

fn check_mean(m: &PhotonMoments) -> Result<()> {
    if m.mean <= 0.0 {
        return Err(Error::UndefinedQ);
    }
    Ok(())
}

fn width_from(mean: f64, q: f64, d: f64, f: f64) -> Result<WidthPrediction> {
    if d <= 0.0 {
        return Err(Error::NumericalFailure("second moment D vanishes".into()));
    }
    let normalized_variance = (q + f / (d * d)) / mean;
    Ok(WidthPrediction {
        mean: d,
        variance: normalized_variance * d * d,
        normalized_variance,
    })
}

fn position_axis(mean: f64, variance: f64, d_axis: f64, g_axis: f64) -> f64 {
    (d_axis - g_axis * g_axis) / mean + variance / (mean * mean) * g_axis * g_axis
}

fn effective(
    moments: &PhotonMoments,
    dm: &DiscreteMoments,
    norm: Normalization,
) -> Result<(PhotonMoments, DiscreteMoments)> {
    check_mean(moments)?;
    match norm {
        Normalization::Raw => Ok((*moments, *dm)),
        Normalization::Renormalized => Ok((moments.thinned(dm.captured.min(1.0))?, dm.renormalized()?)),
    }
}

/// `W = D`, `Var[W] / W^2 = (Q + F / D^2) / n`.
pub fn discrete_width_prediction(
    moments: &PhotonMoments,
    dm: &DiscreteMoments,
    norm: Normalization,
) -> Result<WidthPrediction> {
    let (m, dm) = effective(moments, dm, norm)?;
    width_from(m.mean, m.q()?, dm.d, dm.f)
}

/// `Var[P] = (D_x - G_x^2) / n + Var[n] / n^2 G_x^2` for both axes.
pub fn discrete_position_prediction(
    moments: &PhotonMoments,
    dm: &DiscreteMoments,
    norm: Normalization,
) -> Result<PositionPrediction> {
    let (m, dm) = effective(moments, dm, norm)?;
    Ok(PositionPrediction {
        mean_x: dm.g_x,
        mean_y: dm.g_y,
        variance_x: position_axis(m.mean, m.variance, dm.d_x, dm.g_x),
        variance_y: position_axis(m.mean, m.variance, dm.d_y, dm.g_y),
    })
}

/// Width and position predictions from the continuous mode moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousPrediction {
    pub moments: PlaneMoments,
    pub width: WidthPrediction,
    pub position: PositionPrediction,
}

pub fn continuous_predictions(moments: &PhotonMoments, mode: &SpatialMode) -> Result<ContinuousPrediction> {
    check_mean(moments)?;
    let pm = mode.continuous_moments();
    if !(pm.d.is_finite() && pm.f.is_finite()) {
        return Err(Error::NumericalFailure("mode moments diverge".into()));
    }
    let width = width_from(moments.mean, moments.q()?, pm.d, pm.f)?;
    Ok(ContinuousPrediction {
        moments: pm,
        width,
        position: PositionPrediction {
            mean_x: pm.g_x,
            mean_y: pm.g_y,
            variance_x: position_axis(moments.mean, moments.variance, pm.d_x, pm.g_x),
            variance_y: position_axis(moments.mean, moments.variance, pm.d_y, pm.g_y),
        },
    })
}

/// Discrete predictions for a detector of efficiency `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyPrediction {
    pub efficiency: f64,
    pub detected: PhotonMoments,
    pub width: WidthPrediction,
    pub position: PositionPrediction,
}

/// Substitutes the thinned moments `(eta n, eta Q)` into the discrete formulas.
pub fn lossy_predictions(
    moments: &PhotonMoments,
    eta: f64,
    dm: &DiscreteMoments,
    norm: Normalization,
) -> Result<LossyPrediction> {
    if eta <= 0.0 {
        return Err(Error::InvalidArgument(
            "efficiency must be positive for a noise prediction".into(),
        ));
    }
    let detected = moments.thinned(eta)?;
    Ok(LossyPrediction {
        efficiency: eta,
        detected,
        width: discrete_width_prediction(&detected, dm, norm)?,
        position: discrete_position_prediction(&detected, dm, norm)?,
    })
}
