//! Photon-count statistics of single-mode light on a pixelated detector.
//!
//! A transverse mode falls on a `2M x 2M` camera. The crate turns the mode
//! into per-pixel detection probabilities, evaluates exact count
//! distributions for small instances, samples Monte Carlo frames with
//! detector loss and dark counts, and estimates the noise of the beam width
//! and position against closed-form predictions.
//!
//! ```
//! use multipixel::prelude::*;
//!
//! let grid = PixelGrid::new(5, 1.0)?;
//! let mode = SpatialMode::gaussian(2.0)?;
//! let p = pixel_probabilities(&mode, &grid, ProbabilityMethod::Intensity)?;
//! let dm = discrete_moments(&p, &grid)?;
//! let coherent = PhotonState::coherent(100.0)?.moments();
//! let w = discrete_width_prediction(&coherent, &dm, Normalization::Renormalized)?;
//! assert!((w.normalized_variance - 0.02).abs() < 1e-3);
//! # Ok::<(), multipixel::Error>(())
//! ```
//!
//! Modules:
//!
//! * [`geometry`]: pixel grid, centers and indexing.
//! * [`modes`]: transverse modes and pixel probabilities.
//! * [`photon_stats`]: photon-number distributions and Mandel `Q`.
//! * [`detector`]: exact pmfs and the frame sampler.
//! * [`estimators`]: beam width and position from frames.
//! * [`theory`]: closed-form noise predictions.
//! * [`run`]: sweep configuration and result files.

pub mod detector;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod modes;
pub mod photon_stats;
pub mod quadrature;
pub mod rng;
pub mod run;
pub mod theory;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::detector::{DetectorModel, ExactInstance, FrameCounts, FrameSampler};
    pub use crate::error::{Error, Result};
    pub use crate::estimators::{repeat_with_error_bars, Experiment, ExperimentSetup, ExperimentSummary, Seeding};
    pub use crate::geometry::PixelGrid;
    pub use crate::modes::{pixel_probabilities, PixelProbabilities, ProbabilityMethod, SpatialMode};
    pub use crate::photon_stats::{PhotonMoments, PhotonNumberDistribution, PhotonState};
    pub use crate::rng::Substream;
    pub use crate::theory::{
        continuous_predictions, discrete_moments, discrete_position_prediction, discrete_width_prediction,
        lossy_predictions, DiscreteMoments, Normalization,
    };
}
