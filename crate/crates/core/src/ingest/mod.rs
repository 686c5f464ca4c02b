//! Dataset ingestion: benchmark loaders, synthetic generation, and
//! manifest validation.
//!
//! Loaders normalize timestamps to integer epoch seconds and repair small
//! timestamp gaps (missing rows) by linear interpolation, capped at 5% of
//! the series; beyond that the series is rejected.

mod nab;
mod synth;
mod yahoo;

pub use nab::load_nab_cloudwatch;
pub use synth::{
    generate_synthetic, mix_seed, AnomalyKind, AnomalySpec, BaseSignal, DriftKind, DriftSpec,
    SynthSpec,
};
pub use yahoo::load_yahoo_a1;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{LabeledSeries, TimePoint};

/// Expected shape of a benchmark dataset, checked after loading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub series_count: usize,
    pub granularity_s: u64,
    pub min_len: usize,
    pub max_len: usize,
}

/// Compare a loaded dataset against its manifest.
///
/// Returns one line per mismatch; an empty report means everything matches.
pub fn validate_manifest(series: &[LabeledSeries], manifest: &DatasetManifest) -> Vec<String> {
    let mut report = Vec::new();
    if series.len() != manifest.series_count {
        report.push(format!(
            "{}: series count {} != expected {}",
            manifest.name,
            series.len(),
            manifest.series_count
        ));
    }
    for s in series {
        if s.granularity_s() != manifest.granularity_s {
            report.push(format!(
                "{}: series '{}' granularity {} != expected {}",
                manifest.name,
                s.id(),
                s.granularity_s(),
                manifest.granularity_s
            ));
        }
    }
    if let Some(min_len) = series.iter().map(LabeledSeries::len).min() {
        if min_len != manifest.min_len {
            report.push(format!(
                "{}: min length {} != expected {}",
                manifest.name, min_len, manifest.min_len
            ));
        }
    }
    if let Some(max_len) = series.iter().map(LabeledSeries::len).max() {
        if max_len != manifest.max_len {
            report.push(format!(
                "{}: max length {} != expected {}",
                manifest.name, max_len, manifest.max_len
            ));
        }
    }
    report
}

/// Raw parsed rows of one series file, before normalization.
pub(crate) struct RawSeries {
    pub id: String,
    pub file: String,
    pub timestamps: Vec<i64>,
    pub values: Vec<f64>,
    pub labels: Vec<bool>,
}

/// Normalize raw timestamps to epoch seconds and repair gaps.
///
/// Two timestamp conventions are accepted: epoch-like (base step equals the
/// dataset granularity) and index-like (base step divides the granularity,
/// e.g. Yahoo's 1,2,3,... row numbering, which is scaled up). Gaps that are
/// whole multiples of the step are filled by linear interpolation with
/// unlabeled points, capped at 5% of the repaired length.
pub(crate) fn assemble_series(raw: RawSeries, granularity_s: u64) -> Result<LabeledSeries> {
    let RawSeries {
        id,
        file,
        timestamps,
        values,
        labels,
    } = raw;
    if timestamps.len() < 2 {
        return Err(Error::InvalidSeries {
            id,
            reason: format!("{file}: fewer than 2 rows"),
        });
    }
    let mut base_step = i64::MAX;
    for (i, w) in timestamps.windows(2).enumerate() {
        let delta = w[1] - w[0];
        if delta <= 0 {
            return Err(Error::ParseRow {
                file,
                line: i + 3, // header + 1-based + second row of the pair
                reason: format!("non-monotone timestamp {} after {}", w[1], w[0]),
            });
        }
        base_step = base_step.min(delta);
    }
    let scale = if base_step == granularity_s as i64 {
        1
    } else if granularity_s as i64 % base_step == 0 {
        granularity_s as i64 / base_step
    } else {
        return Err(Error::InvalidSeries {
            id,
            reason: format!("{file}: timestamp step {base_step} incompatible with granularity {granularity_s}"),
        });
    };

    let step = granularity_s as i64;
    let mut points = Vec::with_capacity(values.len());
    let mut out_labels = Vec::with_capacity(values.len());
    let mut inserted = 0usize;
    points.push(TimePoint {
        timestamp: timestamps[0] * scale,
        value: values[0],
    });
    out_labels.push(labels[0]);
    for i in 1..timestamps.len() {
        let prev_t = timestamps[i - 1] * scale;
        let cur_t = timestamps[i] * scale;
        let delta = cur_t - prev_t;
        if delta % step != 0 {
            return Err(Error::InvalidSeries {
                id,
                reason: format!("{file}: timestamp gap {delta}s is not a multiple of {step}s"),
            });
        }
        let missing = (delta / step - 1) as usize;
        for m in 1..=missing {
            let t = m as f64 / (missing + 1) as f64;
            points.push(TimePoint {
                timestamp: prev_t + step * m as i64,
                value: values[i - 1] + t * (values[i] - values[i - 1]),
            });
            out_labels.push(false);
        }
        inserted += missing;
        points.push(TimePoint {
            timestamp: cur_t,
            value: values[i],
        });
        out_labels.push(labels[i]);
    }
    if inserted * 20 > points.len() {
        return Err(Error::TooManyGaps {
            id,
            missing: inserted,
            len: points.len(),
        });
    }
    LabeledSeries::new(id, granularity_s, points, out_labels)
}
