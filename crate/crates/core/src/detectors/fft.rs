//! FFT detector: low-frequency spectrum truncation as a fitted curve,
//! absolute residuals as anomaly scores.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the FFT detector.
///
/// `keep_components` counts the positive harmonics retained for the fitted
/// curve; the DC bin and the conjugate mirrors are always kept with them, so
/// the reconstruction stays real. `keep_components = floor(n / 2)` retains
/// the full spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FftParams {
    pub keep_components: usize,
}

impl Default for FftParams {
    fn default() -> Self {
        Self { keep_components: 10 }
    }
}

impl FftParams {
    pub fn validate(&self) -> Result<()> {
        if self.keep_components == 0 {
            return Err(Error::InvalidParameter(
                "fft keep_components must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Inverse transform of the spectrum truncated to the lowest frequencies.
///
/// Bin `j` of an `n`-point spectrum has frequency `min(j, n - j)`; bins with
/// frequency above `keep_components` are zeroed before inversion.
pub fn low_pass_reconstruction(values: &[f64], params: &FftParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n = values.len();
    if n < 2 * params.keep_components {
        return Err(Error::WindowTooShort {
            needed: 2 * params.keep_components,
            got: n,
        });
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, bin) in buf.iter_mut().enumerate() {
        if j.min(n - j) > params.keep_components {
            *bin = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|c| c.re / n as f64).collect())
}

/// Absolute deviation of each point from the fitted low-frequency curve.
pub fn fft_score(values: &[f64], params: &FftParams) -> Result<Vec<f64>> {
    let recon = low_pass_reconstruction(values, params)?;
    Ok(values
        .iter()
        .zip(&recon)
        .map(|(&v, &r)| (v - r).abs())
        .collect())
}

/// Maximum anomaly score of the (anomaly-free) training data. Points above
/// the threshold are classified anomalous; the strict inequality keeps a
/// model from flagging its own worst training point.
pub fn calibrate_threshold(train_scores: &[f64]) -> Result<f64> {
    if train_scores.is_empty() {
        return Err(Error::EmptyInput("threshold calibration"));
    }
    Ok(train_scores.iter().copied().fold(f64::MIN, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_scores_zero() {
        for keep in [1, 3, 10] {
            let values = vec![4.2; 64];
            let scores = fft_score(&values, &FftParams { keep_components: keep }).unwrap();
            assert!(scores.iter().all(|&s| s <= 1e-9), "keep={keep}");
        }
    }

    #[test]
    fn covered_sinusoid_reconstructs_exactly() {
        // Period 16 divides 64, so frequency 4 is covered by keep >= 4.
        let values: Vec<f64> = (0..64)
            .map(|i| (std::f64::consts::TAU * i as f64 / 16.0).sin())
            .collect();
        let scores = fft_score(&values, &FftParams { keep_components: 4 }).unwrap();
        assert!(scores.iter().all(|&s| s <= 1e-6));
    }

    #[test]
    fn window_too_short_rejected() {
        let err = fft_score(&[1.0; 5], &FftParams { keep_components: 3 }).unwrap_err();
        assert!(matches!(err, Error::WindowTooShort { needed: 6, got: 5 }));
    }

    #[test]
    fn calibrate_threshold_examples() {
        assert_eq!(calibrate_threshold(&[0.1, 0.5, 0.3]).unwrap(), 0.5);
        let c = calibrate_threshold(&[0.2, 0.2, 0.2]).unwrap();
        assert_eq!(c, 0.2);
        // Strict rule: a score equal to the threshold is non-anomalous.
        let flagged = 0.2 > c;
        assert!(!flagged);
        assert!(calibrate_threshold(&[]).is_err());
    }
}
