//! FEDD feature extraction: six linear features (autocorrelation, partial
//! autocorrelation, variance, skewness, kurtosis, turning-point rate) and
//! two non-linear ones (bicorrelation, mutual information), plus the cosine
//! dissimilarity between feature vectors.
//!
//! Lag and bin counts are fixed here in one place: acf/pacf at lags 1..=5,
//! bicorrelation at lags 1..=3, mutual information at lag 1 over an 8x8
//! histogram. The vector dimension is [`FEATURE_DIM`] and the order is the
//! field order of [`FeatureVector::as_slice`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ACF_LAGS: usize = 5;
pub const PACF_LAGS: usize = 5;
pub const BICORR_LAGS: usize = 3;
pub const MI_LAG: usize = 1;
pub const MI_BINS: usize = 8;
/// Minimum window length accepted by [`extract_features`].
pub const MIN_FEATURE_WINDOW: usize = 32;
/// acf(5) + pacf(5) + variance + skewness + kurtosis + turning rate +
/// bicorrelation(3) + mutual information(1).
pub const FEATURE_DIM: usize = 18;

/// The 18 FEDD features of one window, in fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn variance(&self) -> f64 {
        self.0[10]
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Centered moments m2..m4 with 1/n normalization.
fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let m = mean(x);
    let n = x.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Sample autocorrelation at `lag`, clamped to [-1, 1].
pub fn acf(x: &[f64], lag: usize) -> Result<f64> {
    if lag == 0 || x.len() <= lag {
        return Err(Error::WindowTooShort {
            needed: lag + 1,
            got: x.len(),
        });
    }
    let m = mean(x);
    let denom: f64 = x.iter().map(|&v| (v - m).powi(2)).sum();
    if denom <= 0.0 {
        return Err(Error::DegenerateWindow {
            context: "acf".into(),
        });
    }
    let num: f64 = x
        .windows(lag + 1)
        .map(|w| (w[0] - m) * (w[lag] - m))
        .sum();
    Ok((num / denom).clamp(-1.0, 1.0))
}

/// Partial autocorrelations at lags 1..=max_lag via the Durbin-Levinson
/// recursion on the sample acf. A vanishing recursion denominator (exactly
/// collinear lags) zeroes the remaining coefficients instead of failing.
pub fn pacf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 || x.len() <= max_lag {
        return Err(Error::WindowTooShort {
            needed: max_lag + 1,
            got: x.len(),
        });
    }
    let r: Vec<f64> = (1..=max_lag).map(|k| acf(x, k)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(max_lag);
    let mut phi_prev: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let phi_kk = if k == 1 {
            r[0]
        } else {
            let num = r[k - 1]
                - phi_prev
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| p * r[k - 2 - j])
                    .sum::<f64>();
            let den = 1.0
                - phi_prev
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| p * r[j])
                    .sum::<f64>();
            if den.abs() < 1e-12 {
                out.resize(max_lag, 0.0);
                return Ok(out);
            }
            num / den
        };
        let mut phi_new = Vec::with_capacity(k);
        for j in 0..k - 1 {
            phi_new.push(phi_prev[j] - phi_kk * phi_prev[k - 2 - j]);
        }
        phi_new.push(phi_kk);
        out.push(phi_kk);
        phi_prev = phi_new;
    }
    Ok(out)
}

/// Fraction of interior points that are strict local extrema.
pub fn turning_point_rate(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::WindowTooShort {
            needed: 3,
            got: x.len(),
        });
    }
    let turns = x
        .windows(3)
        .filter(|w| (w[1] > w[0] && w[1] > w[2]) || (w[1] < w[0] && w[1] < w[2]))
        .count();
    Ok(turns as f64 / (x.len() - 2) as f64)
}

/// Normalized third-order lagged moment:
/// `mean_t(x~_t * x~_{t+lag} * x~_{t+2 lag}) / s^3` with `x~` the centered
/// series and `s` its sample standard deviation.
pub fn bicorrelation(x: &[f64], lag: usize) -> Result<f64> {
    if lag == 0 || x.len() <= 2 * lag {
        return Err(Error::WindowTooShort {
            needed: 2 * lag + 1,
            got: x.len(),
        });
    }
    let m = mean(x);
    let n = x.len();
    let var: f64 = x.iter().map(|&v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateWindow {
            context: "bicorrelation".into(),
        });
    }
    let s3 = var.sqrt().powi(3);
    let terms = n - 2 * lag;
    let num: f64 = (0..terms)
        .map(|t| (x[t] - m) * (x[t + lag] - m) * (x[t + 2 * lag] - m))
        .sum();
    Ok(num / terms as f64 / s3)
}

/// Mutual information (nats) between pairs `(x_t, x_{t+lag})` estimated on
/// an equal-width 2-D histogram whose edges span the window's min/max on
/// both axes.
pub fn mutual_information(x: &[f64], lag: usize, bins: usize) -> Result<f64> {
    if lag == 0 || x.len() <= lag {
        return Err(Error::WindowTooShort {
            needed: lag + 1,
            got: x.len(),
        });
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "mutual information needs >= 2 bins, got {bins}"
        )));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateWindow {
            context: "mutual_information".into(),
        });
    }
    let width = hi - lo;
    let bin_of = |v: f64| (((v - lo) / width * bins as f64) as usize).min(bins - 1);
    let pairs = x.len() - lag;
    let mut joint = vec![0usize; bins * bins];
    for t in 0..pairs {
        joint[bin_of(x[t]) * bins + bin_of(x[t + lag])] += 1;
    }
    let mut row = vec![0usize; bins];
    let mut col = vec![0usize; bins];
    for i in 0..bins {
        for j in 0..bins {
            row[i] += joint[i * bins + j];
            col[j] += joint[i * bins + j];
        }
    }
    let n = pairs as f64;
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c > 0 {
                let p = c as f64 / n;
                mi += p * (p * n * n / (row[i] as f64 * col[j] as f64)).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Extract the 18-feature vector of a window. Component failures are
/// reported with the offending feature named.
pub fn extract_features(x: &[f64]) -> Result<FeatureVector> {
    if x.len() < MIN_FEATURE_WINDOW {
        return Err(Error::WindowTooShort {
            needed: MIN_FEATURE_WINDOW,
            got: x.len(),
        });
    }
    fn named(feature: &'static str) -> impl Fn(Error) -> Error {
        move |e| match e {
            Error::DegenerateWindow { .. } => Error::DegenerateWindow {
                context: feature.to_string(),
            },
            other => other,
        }
    }
    let mut out = [0.0; FEATURE_DIM];
    for lag in 1..=ACF_LAGS {
        out[lag - 1] = acf(x, lag).map_err(named("acf"))?;
    }
    let p = pacf(x, PACF_LAGS).map_err(named("pacf"))?;
    out[ACF_LAGS..ACF_LAGS + PACF_LAGS].copy_from_slice(&p);
    let (m2, m3, m4) = central_moments(x);
    if m2 <= 0.0 {
        return Err(Error::DegenerateWindow {
            context: "variance".into(),
        });
    }
    let n = x.len() as f64;
    out[10] = m2 * n / (n - 1.0); // sample variance
    out[11] = m3 / m2.powf(1.5); // skewness
    out[12] = m4 / (m2 * m2) - 3.0; // excess kurtosis
    out[13] = turning_point_rate(x)?;
    for lag in 1..=BICORR_LAGS {
        out[13 + lag] = bicorrelation(x, lag).map_err(named("bicorrelation"))?;
    }
    out[17] = mutual_information(x, MI_LAG, MI_BINS).map_err(named("mutual_information"))?;
    debug_assert!(out.iter().all(|v| v.is_finite()));
    Ok(FeatureVector(out))
}

/// Cosine distance `1 - a.b / (|a||b|)`, in [0, 2].
pub fn feature_dissimilarity(reference: &FeatureVector, current: &FeatureVector) -> Result<f64> {
    let a = reference.as_slice();
    let b = current.as_slice();
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(Error::ZeroNormVector);
    }
    Ok((1.0 - dot / (norm_a * norm_b)).clamp(0.0, 2.0))
}
