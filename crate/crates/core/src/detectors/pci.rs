//! PCI detector: prediction confidence interval from the k nearest
//! continuous neighbors of each point.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Parameters of the PCI detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PciParams {
    /// Neighbor count, k/2 on each side of the point.
    pub k: usize,
    /// Complement of the confidence level of the interval.
    pub alpha: f64,
}

impl Default for PciParams {
    fn default() -> Self {
        Self { k: 10, alpha: 0.05 }
    }
}

impl PciParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || !self.k.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "pci k {} must be even and >= 2",
                self.k
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pci alpha {} must be in (0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Two-sided Gaussian quantile for the configured alpha.
    pub fn z(&self) -> f64 {
        Normal::new(0.0, 1.0)
            .expect("unit normal")
            .inverse_cdf(1.0 - self.alpha / 2.0)
    }
}

/// A point is anomalous iff its value lies strictly outside
/// `mean(neighbors) +- z(alpha) * std(neighbors) * sqrt(1 + 1/k)`.
///
/// Neighbors are the k/2 values on each side of the point (excluding the
/// point itself); at the range boundaries the nearest k in-range values are
/// taken instead, keeping the neighbor count and interval width comparable.
pub fn pci_detect(values: &[f64], params: &PciParams) -> Result<Vec<bool>> {
    params.validate()?;
    let n = values.len();
    let k = params.k;
    if n < k + 1 {
        return Err(Error::BatchTooShort {
            detector: "pci",
            min: k + 1,
            got: n,
        });
    }
    let z = params.z();
    let width_factor = (1.0 + 1.0 / k as f64).sqrt();
    let mut preds = Vec::with_capacity(n);
    let mut neighbors = Vec::with_capacity(k);
    for i in 0..n {
        let mut before = (k / 2).min(i);
        let mut after = k - before;
        if after > n - 1 - i {
            after = n - 1 - i;
            before = k - after;
        }
        neighbors.clear();
        neighbors.extend_from_slice(&values[i - before..i]);
        neighbors.extend_from_slice(&values[i + 1..=i + after]);
        debug_assert_eq!(neighbors.len(), k);

        let mean = neighbors.iter().sum::<f64>() / k as f64;
        let var = neighbors.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        let half_width = z * var.sqrt() * width_factor;
        preds.push(values[i] < mean - half_width || values[i] > mean + half_width);
    }
    Ok(preds)
}
