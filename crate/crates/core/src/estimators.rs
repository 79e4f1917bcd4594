//! Per-run beam width and position, experiment statistics and the
//! repetition procedure behind error bars.
//!
//! Width and position of run `r` are normalized by the experiment-wide mean
//! count `C = (1/R) sum_r C_r`, never by the run's own count:
//!
//! ```text
//! W_r = (1/C) sum_nu |x_nu|^2 n_{nu r}
//! P_r = (1/C) sum_nu x_nu n_{nu r}
//! ```
//!
//! All variances divide by `R` (population convention). Frames with zero
//! counts are kept and contribute `W_r = 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{DetectorModel, FrameCounts, FrameSampler};
use crate::error::{Error, Result};
use crate::geometry::PixelGrid;
use crate::modes::{neumaier_sum, PixelProbabilities};
use crate::photon_stats::PhotonNumberDistribution;
use crate::rng::Substream;

/// Per-frame sufficient statistics for width and position.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSums {
    /// `C_r = sum_nu n_nu`.
    pub counts: u64,
    /// `sum_nu x_nu n_nu`.
    pub sum_x: f64,
    /// `sum_nu y_nu n_nu`.
    pub sum_y: f64,
    /// `sum_nu |x_nu|^2 n_nu`.
    pub sum_r2: f64,
}

impl RunSums {
    pub fn from_frame(frame: &FrameCounts, centers: &[(f64, f64)]) -> Self {
        let mut out = RunSums::default();
        for (&n, &(x, y)) in frame.counts.iter().zip(centers) {
            if n == 0 {
                continue;
            }
            let n = n as f64;
            out.counts += n as u64;
            out.sum_x += x * n;
            out.sum_y += y * n;
            out.sum_r2 += (x * x + y * y) * n;
        }
        out
    }
}

/// The runs of one experiment, reduced to [`RunSums`].
#[derive(Debug, Clone)]
pub struct Experiment {
    grid: PixelGrid,
    runs: Vec<RunSums>,
}

/// Mean, population variance and their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// From the fourth central moment: `sqrt((m4 - var^2) / R)`.
    pub se_variance: f64,
}

/// A derived estimate with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Statistics of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub runs: usize,
    /// `C`.
    pub mean_count: f64,
    /// Mean width `W`.
    pub width_mean: Estimate,
    /// `Var[W]`.
    pub width_variance: Estimate,
    /// `Var[W] / W^2`.
    pub width_normalized_variance: Estimate,
    pub position_x_mean: Estimate,
    pub position_y_mean: Estimate,
    /// `Var[P_x]`.
    pub position_x_variance: Estimate,
    pub position_y_variance: Estimate,
}

impl ExperimentSummary {
    /// Relative width noise `sqrt(Var[W]) / W`.
    pub fn width_noise(&self) -> Estimate {
        let v = self.width_normalized_variance;
        let value = v.value.max(0.0).sqrt();
        Estimate {
            value,
            se: if value > 0.0 { v.se / (2.0 * value) } else { v.se.sqrt() },
        }
    }
}

impl Experiment {
    pub fn from_frames(grid: PixelGrid, frames: &[FrameCounts]) -> Result<Self> {
        let centers = grid.centers();
        if let Some(f) = frames.iter().find(|f| f.counts.len() != centers.len()) {
            return Err(Error::InvalidArgument(format!(
                "frame has {} pixels, grid has {}",
                f.counts.len(),
                centers.len()
            )));
        }
        let runs = frames.iter().map(|f| RunSums::from_frame(f, &centers)).collect();
        Ok(Self { grid, runs })
    }

    pub fn from_run_sums(grid: PixelGrid, runs: Vec<RunSums>) -> Self {
        Self { grid, runs }
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn runs(&self) -> &[RunSums] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// `C`, the mean total count per run.
    pub fn mean_count(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        neumaier_sum(self.runs.iter().map(|r| r.counts as f64)) / self.runs.len() as f64
    }

    fn normalizer(&self) -> Result<f64> {
        let c = self.mean_count();
        if c <= 0.0 {
            return Err(Error::DegenerateExperiment);
        }
        Ok(c)
    }

    /// `W_r` for every run.
    pub fn beam_width_per_run(&self) -> Result<Vec<f64>> {
        let c = self.normalizer()?;
        Ok(self.runs.iter().map(|r| r.sum_r2 / c).collect())
    }

    /// `(P_x, P_y)` for every run.
    pub fn beam_position_per_run(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let c = self.normalizer()?;
        Ok((
            self.runs.iter().map(|r| r.sum_x / c).collect(),
            self.runs.iter().map(|r| r.sum_y / c).collect(),
        ))
    }

    /// Width and position statistics with standard errors.
    ///
    /// Errors on the variances account for the randomness of `C` itself.
    pub fn summarize(&self) -> Result<ExperimentSummary> {
        if self.runs.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.runs.len(),
            });
        }
        let c = self.normalizer()?;
        let counts: Vec<f64> = self.runs.iter().map(|r| r.counts as f64).collect();
        let r2: Vec<f64> = self.runs.iter().map(|r| r.sum_r2).collect();
        let xs: Vec<f64> = self.runs.iter().map(|r| r.sum_x).collect();
        let ys: Vec<f64> = self.runs.iter().map(|r| r.sum_y).collect();
        Ok(ExperimentSummary {
            runs: self.runs.len(),
            mean_count: c,
            width_mean: mean_ratio(&r2, &counts),
            width_variance: variance_ratio(&r2, &counts),
            width_normalized_variance: variance_ratio(&r2, &r2),
            position_x_mean: mean_ratio(&xs, &counts),
            position_y_mean: mean_ratio(&ys, &counts),
            position_x_variance: variance_ratio(&xs, &counts),
            position_y_variance: variance_ratio(&ys, &counts),
        })
    }
}

/// Mean, population variance and standard errors of `values`.
pub fn summarize(values: &[f64]) -> Result<Summary> {
    let r = values.len();
    if r < 2 {
        return Err(Error::InsufficientData { needed: 2, got: r });
    }
    let rf = r as f64;
    let mean = neumaier_sum(values.iter().copied()) / rf;
    let variance = neumaier_sum(values.iter().map(|v| (v - mean).powi(2))) / rf;
    let m4 = neumaier_sum(values.iter().map(|v| (v - mean).powi(4))) / rf;
    Ok(Summary {
        mean,
        variance,
        se_mean: (variance / rf).sqrt(),
        se_variance: ((m4 - variance * variance).max(0.0) / rf).sqrt(),
    })
}

struct Central {
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
    cov: f64,
    m4_x: f64,
    /// `E[(x - mx)^2 (y - my)]`.
    m21: f64,
}

fn central(x: &[f64], y: &[f64]) -> Central {
    let r = x.len() as f64;
    let mean_x = neumaier_sum(x.iter().copied()) / r;
    let mean_y = neumaier_sum(y.iter().copied()) / r;
    let dx = || x.iter().map(move |v| v - mean_x);
    let var_x = neumaier_sum(dx().map(|d| d * d)) / r;
    let var_y = neumaier_sum(y.iter().map(|v| (v - mean_y).powi(2))) / r;
    let cov = neumaier_sum(dx().zip(y).map(|(d, v)| d * (v - mean_y))) / r;
    let m4_x = neumaier_sum(dx().map(|d| d.powi(4))) / r;
    let m21 = neumaier_sum(dx().zip(y).map(|(d, v)| d * d * (v - mean_y))) / r;
    Central {
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov,
        m4_x,
        m21,
    }
}

/// `mean(x) / mean(y)` with a delta-method standard error.
pub fn mean_ratio(x: &[f64], y: &[f64]) -> Estimate {
    let r = x.len() as f64;
    let c = central(x, y);
    let value = c.mean_x / c.mean_y;
    let var = (c.var_x / c.mean_y.powi(2) - 2.0 * c.mean_x * c.cov / c.mean_y.powi(3)
        + c.mean_x.powi(2) * c.var_y / c.mean_y.powi(4))
        / r;
    Estimate {
        value,
        se: var.max(0.0).sqrt(),
    }
}

/// `Var(x) / mean(y)^2` (population variance) with a delta-method standard
/// error that includes the covariance between `Var(x)` and `mean(y)`.
pub fn variance_ratio(x: &[f64], y: &[f64]) -> Estimate {
    let r = x.len() as f64;
    let c = central(x, y);
    let mu = c.mean_y;
    let v = c.var_x;
    let value = v / (mu * mu);
    let var = ((c.m4_x - v * v) / mu.powi(4) + 4.0 * v * v * c.var_y / mu.powi(6)
        - 4.0 * v * c.m21 / mu.powi(5))
        / r;
    Estimate {
        value,
        se: var.max(0.0).sqrt(),
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub grid: PixelGrid,
    pub sampler: FrameSampler,
    pub runs: usize,
}

impl ExperimentSetup {
    pub fn new(
        grid: PixelGrid,
        dist: PhotonNumberDistribution,
        probs: &PixelProbabilities,
        detector: &DetectorModel,
        runs: usize,
    ) -> Result<Self> {
        if probs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} pixel probabilities for a grid of {} pixels",
                probs.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            sampler: FrameSampler::new(dist, probs, detector)?,
            runs,
        })
    }

    /// Samples all runs; frame `r` draws from `stream.frame_rng(r)`.
    pub fn run(&self, stream: &Substream) -> Experiment {
        let centers = self.grid.centers();
        let runs = (0..self.runs as u64)
            .into_par_iter()
            .map(|r| {
                let frame = self.sampler.sample(&mut stream.frame_rng(r), false);
                RunSums::from_frame(&frame, &centers)
            })
            .collect();
        Experiment::from_run_sums(self.grid, runs)
    }

    /// Samples the full frames (for serialization or inspection).
    pub fn frames(&self, stream: &Substream) -> Vec<FrameCounts> {
        (0..self.runs as u64)
            .into_par_iter()
            .map(|r| self.sampler.sample(&mut stream.frame_rng(r), false))
            .collect()
    }
}

/// How repetitions obtain their random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    /// Repetition `k` uses `stream.child(k)`.
    Independent,
    /// Every repetition reuses `stream` (determinism check).
    Identical,
}

/// Mean and spread over repetitions of the summary quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepetitionStats {
    pub repetitions: usize,
    pub width_mean: Summary,
    pub width_normalized_variance: Summary,
    pub position_x_mean: Summary,
    pub position_x_variance: Summary,
}

impl RepetitionStats {
    /// Standard deviation of the mean width across repetitions (the error bar).
    pub fn width_mean_spread(&self) -> f64 {
        self.width_mean.variance.sqrt()
    }
}

/// Reruns the experiment `repetitions` times and reports mean and spread of
/// each summary quantity across the reruns.
pub fn repeat_with_error_bars(
    setup: &ExperimentSetup,
    repetitions: usize,
    stream: &Substream,
    seeding: Seeding,
) -> Result<(RepetitionStats, Vec<ExperimentSummary>)> {
    if repetitions < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: repetitions,
        });
    }
    let summaries = (0..repetitions as u64)
        .map(|k| {
            let s = match seeding {
                Seeding::Independent => stream.child(k),
                Seeding::Identical => *stream,
            };
            setup.run(&s).summarize()
        })
        .collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&ExperimentSummary) -> f64| -> Result<Summary> {
        summarize(&summaries.iter().map(f).collect::<Vec<_>>())
    };
    let stats = RepetitionStats {
        repetitions,
        width_mean: pick(|s| s.width_mean.value)?,
        width_normalized_variance: pick(|s| s.width_normalized_variance.value)?,
        position_x_mean: pick(|s| s.position_x_mean.value)?,
        position_x_variance: pick(|s| s.position_x_variance.value)?,
    };
    Ok((stats, summaries))
}
