//! Fatigue-life prediction with calibrated uncertainty intervals.
//!
//! The crate combines three layers:
//!
//! * [`physics`]: closed-form stress-life and strain-life relations
//!   (Basquin, Stromeyer, Walker, Coffin–Manson, Smith–Watson–Topper and
//!   the critical-plane models) with fitting and numeric inversion.
//! * [`classical`], [`neural`] and [`bayesian`]: eight regression families
//!   that share the uniform [`model`] contract and return a
//!   [`PredictiveDistribution`] in log10-life space.
//! * [`piml`] and [`evaluation`]: Basquin-based feature augmentation, the
//!   bounded-life loss, interval metrics and a seeded k-fold harness.
//!
//! ```
//! use fatigue_uq::physics::{basquin_fit, basquin_life};
//!
//! let fit = basquin_fit(&[(0.5, 2.0), (0.25, 4.0)]).unwrap();
//! assert!((fit.c - 1.0).abs() < 1e-12);
//! assert!((fit.m + 1.0).abs() < 1e-12);
//! assert!((basquin_life(&fit, 0.5).unwrap() - 2.0).abs() < 1e-12);
//! ```

pub mod bayesian;
pub mod classical;
pub mod dataset;
pub mod evaluation;
pub mod linalg;
pub mod model;
pub mod neural;
pub mod physics;
pub mod piml;
pub mod rng;

pub use dataset::{Dataset, DatasetSchema};
pub use model::{fit, predict, FittedModel, ModelFamily, ModelSpec, PredictiveDistribution};
