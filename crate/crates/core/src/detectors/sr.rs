//! Spectral Residual detector: saliency map from the log-amplitude spectrum
//! minus its local average, thresholded on a local-mean ratio.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitude floor applied before logarithms and ratio denominators.
pub const SR_EPS: f64 = 1e-8;

/// Parameters of the Spectral Residual detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrParams {
    /// Window of the trailing average over the log-amplitude spectrum (q).
    pub avg_filter_len: usize,
    /// Window of the trailing average over the saliency map (m).
    pub score_window: usize,
    /// Relative threshold on (saliency - local mean) / local mean.
    pub tau: f64,
    /// Training points prepended to each batch for spectral continuity.
    pub context_len: usize,
}

impl Default for SrParams {
    fn default() -> Self {
        Self {
            avg_filter_len: 3,
            score_window: 21,
            tau: 3.0,
            context_len: 128,
        }
    }
}

impl SrParams {
    pub fn validate(&self) -> Result<()> {
        if self.avg_filter_len == 0 || self.score_window == 0 {
            return Err(Error::InvalidParameter(
                "sr filter windows must be >= 1".into(),
            ));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sr tau {} must be finite and > 0",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Trailing mean with window `q`: `out[i]` averages the up-to-`q` values
/// ending at `i`. Weights always sum to one, so adding a constant to the
/// input shifts the output by the same constant.
fn trailing_mean(xs: &[f64], q: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for i in 0..xs.len() {
        sum += xs[i];
        if i >= q {
            sum -= xs[i - q];
        }
        out.push(sum / (i.min(q - 1) + 1) as f64);
    }
    out
}

/// Saliency map: `|IFFT(exp(R(f) + i phase(f)))|` with
/// `R(f) = log|F(f)| - trailing-mean_q(log|F(f)|)`.
///
/// Amplitudes are floored at [`SR_EPS`] before the logarithm; bins whose
/// amplitude is at or below the floor are zeroed in the modified spectrum.
/// The map is invariant under positive scaling of the input: the
/// log-amplitude shifts by `log c` and the mean filter removes the shift.
pub fn sr_saliency(values: &[f64], params: &SrParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n = values.len();
    if n < params.avg_filter_len {
        return Err(Error::WindowTooShort {
            needed: params.avg_filter_len,
            got: n,
        });
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    let mags: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let logs: Vec<f64> = mags.iter().map(|&m| m.max(SR_EPS).ln()).collect();
    let filtered = trailing_mean(&logs, params.avg_filter_len);
    for j in 0..n {
        if mags[j] <= SR_EPS {
            buf[j] = Complex::new(0.0, 0.0);
        } else {
            let scale = (logs[j] - filtered[j]).exp() / mags[j];
            buf[j] *= scale;
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|c| c.norm() / n as f64).collect())
}

/// Point `i` is anomalous iff
/// `(S(i) - localmean_m(S)(i)) / max(localmean_m(S)(i), eps) > tau`.
/// The ratio rule makes the decision invariant under positive scaling.
pub fn sr_detect(values: &[f64], params: &SrParams) -> Result<Vec<bool>> {
    let saliency = sr_saliency(values, params)?;
    let local = trailing_mean(&saliency, params.score_window);
    Ok(saliency
        .iter()
        .zip(&local)
        .map(|(&s, &l)| (s - l) / l.max(SR_EPS) > params.tau)
        .collect())
}
