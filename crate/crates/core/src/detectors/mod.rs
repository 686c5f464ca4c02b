//! Signal-reconstruction anomaly detectors behind one fit/classify
//! interface.
//!
//! Training values always pass through anomaly-removal interpolation first.
//! The FFT detector calibrates an absolute threshold on its training scores
//! and keeps its fitted curve; SR and PCI thresholds are relative/analytic,
//! so fitting only stores parameters (plus, for SR, the trailing training
//! context that keeps batch spectra continuous).

mod fft;
mod pci;
mod sr;

pub use fft::{calibrate_threshold, fft_score, low_pass_reconstruction, FftParams};
pub use pci::{pci_detect, PciParams};
pub use sr::{sr_detect, sr_saliency, SrParams, SR_EPS};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{remove_anomalies_interpolate, Batch, LabeledSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Fft,
    Sr,
    Pci,
}

impl DetectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::Fft => "fft",
            DetectorKind::Sr => "sr",
            DetectorKind::Pci => "pci",
        }
    }
}

/// Detector kind plus its parameters, as configured in experiment files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorParams {
    Fft(FftParams),
    Sr(SrParams),
    Pci(PciParams),
}

impl DetectorParams {
    pub fn kind(&self) -> DetectorKind {
        match self {
            DetectorParams::Fft(_) => DetectorKind::Fft,
            DetectorParams::Sr(_) => DetectorKind::Sr,
            DetectorParams::Pci(_) => DetectorKind::Pci,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DetectorParams::Fft(p) => p.validate(),
            DetectorParams::Sr(p) => p.validate(),
            DetectorParams::Pci(p) => p.validate(),
        }
    }
}

/// Kind-specific fitted state.
#[derive(Debug, Clone, PartialEq)]
enum FittedState {
    Fft {
        threshold: f64,
        /// Low-frequency reconstruction of the (interpolated) training
        /// window. Past the window the curve is extended by holding its
        /// final value; retraining is what keeps it current.
        curve: Vec<f64>,
    },
    Sr {
        /// Trailing interpolated training values, `context_len` of them.
        context: Vec<f64>,
    },
    Pci,
}

/// A detector fitted on a training range, ready to classify batches.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedDetector {
    params: DetectorParams,
    train_range: Range<usize>,
    state: FittedState,
}

impl FittedDetector {
    pub fn kind(&self) -> DetectorKind {
        self.params.kind()
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    pub fn train_range(&self) -> Range<usize> {
        self.train_range.clone()
    }

    /// Absolute threshold (FFT only).
    pub fn threshold(&self) -> Option<f64> {
        match &self.state {
            FittedState::Fft { threshold, .. } => Some(*threshold),
            _ => None,
        }
    }

    /// Stored SR continuity context (SR only).
    pub fn context(&self) -> Option<&[f64]> {
        match &self.state {
            FittedState::Sr { context } => Some(context),
            _ => None,
        }
    }
}

/// Fit a detector on `train_range`, interpolating labeled anomalies out of
/// the training values first.
pub fn fit(
    params: &DetectorParams,
    series: &LabeledSeries,
    train_range: Range<usize>,
) -> Result<FittedDetector> {
    params.validate()?;
    if train_range.is_empty() || train_range.end > series.len() {
        return Err(Error::InvalidParameter(format!(
            "train range {train_range:?} invalid for series of length {}",
            series.len()
        )));
    }
    let clean = remove_anomalies_interpolate(series, train_range.clone())?;
    let state = match params {
        DetectorParams::Fft(p) => {
            let curve = low_pass_reconstruction(&clean, p)?;
            let scores: Vec<f64> = clean
                .iter()
                .zip(&curve)
                .map(|(&v, &c)| (v - c).abs())
                .collect();
            FittedState::Fft {
                threshold: calibrate_threshold(&scores)?,
                curve,
            }
        }
        DetectorParams::Sr(p) => {
            if clean.len() < p.context_len {
                return Err(Error::WindowTooShort {
                    needed: p.context_len,
                    got: clean.len(),
                });
            }
            FittedState::Sr {
                context: clean[clean.len() - p.context_len..].to_vec(),
            }
        }
        DetectorParams::Pci(_) => FittedState::Pci,
    };
    Ok(FittedDetector {
        params: *params,
        train_range,
        state,
    })
}

/// Classify one batch. Pure: fixed model and input give identical output.
pub fn classify(model: &FittedDetector, series: &LabeledSeries, batch: &Batch) -> Result<Vec<bool>> {
    if batch.end > series.len() || batch.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "batch {}..{} out of bounds for series of length {}",
            batch.start,
            batch.end,
            series.len()
        )));
    }
    match (&model.state, &model.params) {
        (FittedState::Fft { threshold, curve }, DetectorParams::Fft(_)) => {
            let origin = model.train_range.start;
            let preds = series.points()[batch.range()]
                .iter()
                .enumerate()
                .map(|(offset, p)| {
                    let j = batch.start + offset;
                    let idx = j.saturating_sub(origin).min(curve.len() - 1);
                    (p.value - curve[idx]).abs() > *threshold
                })
                .collect();
            Ok(preds)
        }
        (FittedState::Sr { context }, DetectorParams::Sr(p)) => {
            if context.len() + batch.len() < p.avg_filter_len {
                return Err(Error::BatchTooShort {
                    detector: "sr",
                    min: p.avg_filter_len - context.len(),
                    got: batch.len(),
                });
            }
            let mut values = context.clone();
            values.extend(series.values(batch.range()));
            let preds = sr_detect(&values, p)?;
            Ok(preds[context.len()..].to_vec())
        }
        (FittedState::Pci, DetectorParams::Pci(p)) => {
            let values = series.values(batch.range());
            pci_detect(&values, p)
        }
        _ => unreachable!("state always matches params"),
    }
}
