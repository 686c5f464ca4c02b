//! Maintenance strategies for univariate time-series anomaly detectors.
//!
//! The crate is organized around the lifecycle of a deployed detector:
//!
//! - [`series`]: labeled series data model, train/test splitting, batching,
//!   anomaly-segment extraction, and anomaly-removal preprocessing.
//! - [`ingest`]: benchmark loaders (Yahoo A1, NAB realAWSCloudwatch) and a
//!   seeded synthetic generator for desk-scale experiments.
//! - [`detectors`]: FFT, Spectral Residual, and PCI detectors behind one
//!   fit/classify interface with train-set threshold calibration.
//! - [`fedd`]: FEDD concept-drift monitoring (feature extraction, cosine
//!   dissimilarity, EWMA control chart).
//! - [`harness`]: static / full-history / sliding-window retraining under
//!   blind or informed (drift-triggered) schedules.
//! - [`eval`]: delay-adjusted scoring, precision/recall/F1, per-series
//!   aggregation, and Wilcoxon signed-rank comparisons.
//! - [`report`]: experiment report assembly and CSV/JSON rendering.

pub mod detectors;
pub mod error;
pub mod eval;
pub mod fedd;
pub mod harness;
pub mod ingest;
pub mod report;
pub mod series;

pub use error::{Error, Result};
