//! Seeded synthetic labeled series for desk-scale experiments.
//!
//! Determinism contract: identical spec + seed produce a bit-identical
//! series on any platform. To keep streams reproducible across language
//! ports, the generator uses a fixed, fully specified scheme instead of a
//! library RNG: SplitMix64 for uniform 64-bit draws and the Box-Muller
//! transform (cosine branch) for Gaussians, two draws per sample. The same
//! scheme is documented in docs/config.md.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{LabeledSeries, TimePoint};

/// Deterministic base signal: level + trend + sinusoidal seasonality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseSignal {
    pub level: f64,
    #[serde(default)]
    pub trend: f64,
    #[serde(default)]
    pub season_amplitude: f64,
    #[serde(default = "default_period")]
    pub season_period: usize,
}

fn default_period() -> usize {
    24
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    /// Single-point offset; the point is labeled.
    Spike,
    /// Offset applied from `at` onward; only the starting index is labeled,
    /// mirroring the NAB ground-truth convention.
    LevelShift,
}

/// A labeled anomaly. `magnitude` is in units of `noise_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub at: usize,
    pub kind: AnomalyKind,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    /// Adds `magnitude * noise_sigma` to every point from `at` onward.
    MeanShift,
    /// Multiplies the noise variance by `magnitude` from `at` onward.
    VarianceShift,
    /// Multiplies the season period by `magnitude` (rounded, min 2) from
    /// `at` onward.
    PeriodChange,
}

/// An unlabeled distribution change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub at: usize,
    pub kind: DriftKind,
    pub magnitude: f64,
}

/// Recipe for one synthetic labeled series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default = "default_id")]
    pub id: String,
    pub length: usize,
    pub granularity_s: u64,
    pub base: BaseSignal,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub anomalies: Vec<AnomalySpec>,
    #[serde(default)]
    pub drift: Option<DriftSpec>,
    pub seed: u64,
}

fn default_id() -> String {
    "synth".into()
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.length < 2 {
            return fail(format!("length {} < 2", self.length));
        }
        if self.granularity_s == 0 {
            return fail("granularity_s must be positive".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail(format!("noise_sigma {} must be finite and >= 0", self.noise_sigma));
        }
        if self.base.season_amplitude != 0.0 && self.base.season_period < 2 {
            return fail(format!(
                "season_period {} < 2 with non-zero amplitude",
                self.base.season_period
            ));
        }
        for (i, a) in self.anomalies.iter().enumerate() {
            if a.at >= self.length {
                return fail(format!("anomalies[{i}].at {} >= length {}", a.at, self.length));
            }
            if !a.magnitude.is_finite() {
                return fail(format!("anomalies[{i}].magnitude must be finite"));
            }
        }
        if let Some(d) = &self.drift {
            if d.at >= self.length {
                return fail(format!("drift.at {} >= length {}", d.at, self.length));
            }
            if !d.magnitude.is_finite() || d.magnitude < 0.0 {
                return fail("drift.magnitude must be finite and >= 0".into());
            }
            if d.kind == DriftKind::PeriodChange && d.magnitude == 0.0 {
                return fail("period_change magnitude must be > 0".into());
            }
        }
        Ok(())
    }
}

/// SplitMix64: seeded 64-bit generator with a fixed output function.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in (0, 1], 53-bit resolution.
    fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller (cosine branch), two draws per call.
    fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_unit();
        let u2 = self.next_unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Stable seed mixer for deriving per-run series seeds from a spec seed and
/// an experiment seed.
pub fn mix_seed(spec_seed: u64, run_seed: u64) -> u64 {
    let mut rng = SplitMix64::new(spec_seed ^ run_seed.rotate_left(32));
    rng.next_u64()
}

/// Generate a labeled series from a spec. Anomaly and drift offsets are
/// applied after the noise stream, so they never perturb the draws of
/// neighboring points.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<LabeledSeries> {
    spec.validate()?;
    let n = spec.length;
    let mut rng = SplitMix64::new(spec.seed);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut period = spec.base.season_period;
        let mut sigma = spec.noise_sigma;
        let mut shift = 0.0;
        if let Some(d) = &spec.drift {
            if i >= d.at {
                match d.kind {
                    DriftKind::MeanShift => shift = d.magnitude * spec.noise_sigma,
                    DriftKind::VarianceShift => sigma = spec.noise_sigma * d.magnitude.sqrt(),
                    DriftKind::PeriodChange => {
                        period = ((period as f64 * d.magnitude).round() as usize).max(2)
                    }
                }
            }
        }
        let season = if spec.base.season_amplitude != 0.0 {
            spec.base.season_amplitude * (std::f64::consts::TAU * i as f64 / period as f64).sin()
        } else {
            0.0
        };
        let noise = if spec.noise_sigma > 0.0 {
            sigma * rng.next_gaussian()
        } else {
            // Keep the stream position independent of sigma.
            let _ = rng.next_gaussian();
            0.0
        };
        values.push(spec.base.level + spec.base.trend * i as f64 + season + shift + noise);
    }

    let mut labels = vec![false; n];
    for a in &spec.anomalies {
        let offset = a.magnitude * spec.noise_sigma;
        match a.kind {
            AnomalyKind::Spike => values[a.at] += offset,
            AnomalyKind::LevelShift => {
                for v in &mut values[a.at..] {
                    *v += offset;
                }
            }
        }
        labels[a.at] = true;
    }

    let points = values
        .into_iter()
        .enumerate()
        .map(|(i, value)| TimePoint {
            timestamp: i as i64 * spec.granularity_s as i64,
            value,
        })
        .collect();
    LabeledSeries::new(spec.id.clone(), spec.granularity_s, points, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> SynthSpec {
        SynthSpec {
            id: "synth".into(),
            length: 100,
            granularity_s: 3600,
            base: BaseSignal {
                level: 1.0,
                trend: 0.0,
                season_amplitude: 0.0,
                season_period: 24,
            },
            noise_sigma: 0.0,
            anomalies: vec![],
            drift: None,
            seed: 7,
        }
    }

    #[test]
    fn noise_free_constant() {
        let s = generate_synthetic(&base_spec()).unwrap();
        assert!(s.points().iter().all(|p| p.value == 1.0));
        assert!(s.labels().iter().all(|&l| !l));
    }

    #[test]
    fn spike_offsets_exactly() {
        let mut spec = base_spec();
        spec.noise_sigma = 1.0;
        let clean = generate_synthetic(&spec).unwrap();
        spec.anomalies = vec![AnomalySpec {
            at: 50,
            kind: AnomalyKind::Spike,
            magnitude: 10.0,
        }];
        let spiked = generate_synthetic(&spec).unwrap();
        for i in 0..100 {
            // The offset is applied as a single addition after the noise
            // pass, so the stored value is bit-identical to clean + 10.
            let expected = if i == 50 {
                clean.points()[i].value + 10.0
            } else {
                clean.points()[i].value
            };
            assert_eq!(spiked.points()[i].value, expected);
        }
        assert!(spiked.labels()[50]);
        assert_eq!(spiked.labels().iter().filter(|&&l| l).count(), 1);
    }

    #[test]
    fn level_shift_labels_start_only() {
        let mut spec = base_spec();
        spec.noise_sigma = 2.0;
        spec.anomalies = vec![AnomalySpec {
            at: 40,
            kind: AnomalyKind::LevelShift,
            magnitude: 3.0,
        }];
        let clean = {
            let mut c = spec.clone();
            c.anomalies.clear();
            generate_synthetic(&c).unwrap()
        };
        let shifted = generate_synthetic(&spec).unwrap();
        for i in 0..100 {
            let expected = if i >= 40 {
                clean.points()[i].value + 6.0
            } else {
                clean.points()[i].value
            };
            assert_eq!(shifted.points()[i].value, expected);
        }
        let labeled: Vec<usize> = (0..100).filter(|&i| shifted.labels()[i]).collect();
        assert_eq!(labeled, vec![40]);
    }

    #[test]
    fn seed_determinism() {
        let mut spec = base_spec();
        spec.noise_sigma = 1.0;
        spec.seed = 1;
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        spec.seed = 2;
        let c = generate_synthetic(&spec).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = base_spec();
        spec.anomalies = vec![AnomalySpec {
            at: 100,
            kind: AnomalyKind::Spike,
            magnitude: 1.0,
        }];
        assert!(matches!(
            generate_synthetic(&spec).unwrap_err(),
            Error::InvalidSpec(_)
        ));
        let mut spec = base_spec();
        spec.base.season_amplitude = 1.0;
        spec.base.season_period = 1;
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn label_count_matches_anomaly_count() {
        let mut spec = base_spec();
        spec.noise_sigma = 1.0;
        spec.anomalies = vec![
            AnomalySpec {
                at: 10,
                kind: AnomalyKind::Spike,
                magnitude: 5.0,
            },
            AnomalySpec {
                at: 60,
                kind: AnomalyKind::LevelShift,
                magnitude: 2.0,
            },
        ];
        let s = generate_synthetic(&spec).unwrap();
        assert_eq!(s.labels().iter().filter(|&&l| l).count(), 2);
    }
}
