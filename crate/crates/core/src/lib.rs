//! Calibrated Gibbs-posterior nonparametric tolerance intervals.
//!
//! The crate builds one- and two-sided tolerance bounds from check-loss
//! Gibbs posteriors whose learning rate is calibrated by bootstrap
//! Robbins-Monro iteration, alongside the order-statistic benchmarks of
//! Wilks and Young-Mathew and a Monte Carlo harness to compare them.

pub mod benchmarks;
pub mod calibration;
pub mod datasets;
pub mod distributions;
pub mod error;
pub mod gibbs;
pub mod intervals;
pub mod rng;
pub mod simharness;

pub use error::{Error, Result};
