//! Emulation of deterministic computer simulators with Gaussian processes
//! whose input space is augmented by an inferred latent coordinate.
//!
//! A stationary squared-exponential GP on the augmented inputs induces a
//! non-stationary process on the original inputs: the latent coordinate can
//! stretch distances across sharp local features (jumps, isolated peaks) that
//! a plain stationary emulator smears out. The latent values, together with
//! the correlation range parameters, are tracked by a particle system that is
//! updated sequentially as simulator runs arrive, with regression coefficients
//! and the process scale marginalized out in closed form.
//!
//! The crate is organized around the pipeline:
//!
//! * [`kernel`] / [`factor`] — squared-exponential correlation and Cholesky
//!   factors of correlation matrices, including O(t²) one-row extension.
//! * [`predict`] — the marginalized Student-t predictive law, zero-mean
//!   kriging for the latent field, and leave-one-out cross-validation.
//! * [`particle`] — particle state, resample/propagate updates, and
//!   elliptical-slice rejuvenation moves.
//! * [`design`] — active sequential design: score a candidate pool by
//!   predictive variance, run the simulator at the maximizer, update.
//! * [`testbed`] — synthetic truth functions, Latin hypercube and grid
//!   designs, RMSE, and gridded-CSV truth surfaces.
//!
//! Per-particle work (weights, propagation, rejuvenation, prediction) runs in
//! parallel when the `parallel` feature (default) is enabled; results are
//! independent of thread count because every particle slot owns its own
//! counter-based RNG stream and reductions use a fixed summation order.

pub mod data;
pub mod design;
pub mod error;
pub mod ess;
mod exec;
pub mod factor;
pub mod kernel;
pub mod particle;
pub mod predict;
pub mod testbed;

pub use data::{Dataset, Points};
pub use error::{Error, Result};
pub use factor::CorrFactor;
pub use kernel::Ranges;
// pub use particle::{AggregatedPrediction, Aggregation, Mode, Particle, ParticleSet};
pub use predict::{PriorConfig, StudentTPredictive};
