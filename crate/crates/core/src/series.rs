//! Labeled univariate series: data model, splitting, batching, and
//! anomaly-removal preprocessing.
//!
//! All types are immutable after construction and all operations are pure,
//! so they can be used from any number of threads without coordination.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sample of a series: epoch-second timestamp plus a finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub timestamp: i64,
    pub value: f64,
}

/// A univariate time series with per-point anomaly labels.
///
/// Invariants (enforced by [`LabeledSeries::new`]):
/// - at least 2 points, all values finite
/// - timestamps strictly increasing with constant step `granularity_s`
/// - one label per point
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSeries {
    id: String,
    granularity_s: u64,
    points: Vec<TimePoint>,
    labels: Vec<bool>,
}

impl LabeledSeries {
    pub fn new(
        id: impl Into<String>,
        granularity_s: u64,
        points: Vec<TimePoint>,
        labels: Vec<bool>,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidSeries {
            id: id.clone(),
            reason,
        };
        if granularity_s == 0 {
            return Err(invalid("granularity must be positive".into()));
        }
        if points.len() < 2 {
            return Err(invalid(format!("length {} < 2", points.len())));
        }
        if labels.len() != points.len() {
            return Err(invalid(format!(
                "labels length {} != points length {}",
                labels.len(),
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.value.is_finite() {
                return Err(invalid(format!("non-finite value at index {i}")));
            }
        }
        for w in points.windows(2) {
            let delta = w[1].timestamp - w[0].timestamp;
            if delta <= 0 {
                return Err(invalid("timestamps not strictly increasing".into()));
            }
            if delta as u64 != granularity_s {
                return Err(invalid(format!(
                    "timestamp delta {delta} != granularity {granularity_s}"
                )));
            }
        }
        Ok(Self {
            id,
            granularity_s,
            points,
            labels,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn granularity_s(&self) -> u64 {
        self.granularity_s
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TimePoint] {
        &self.points
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    /// Values of `range` copied into a fresh vector.
    pub fn values(&self, range: Range<usize>) -> Vec<f64> {
        self.points[range].iter().map(|p| p.value).collect()
    }
}

/// Maximal run of consecutive ground-truth anomalies, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalySegment {
    pub start: usize,
    pub end: usize,
}

impl AnomalySegment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Train length plus evaluation batch length for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_len: usize,
    pub batch_len: usize,
}

/// One evaluation batch: contiguous `[start, end)` slice of the full series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// First half for training, second half for testing; odd point goes to test.
pub fn split_half(series: &LabeledSeries) -> Result<(Range<usize>, Range<usize>)> {
    let n = series.len();
    if n < 4 {
        return Err(Error::SeriesTooShortToSplit { len: n });
    }
    let mid = n / 2;
    Ok((0..mid, mid..n))
}

/// Tile `test` with consecutive batches of `batch_len`.
///
/// A trailing remainder of at least 2 points becomes a final short batch;
/// a 1-point remainder is merged into the previous batch.
pub fn make_batches(test: Range<usize>, batch_len: usize) -> Result<Vec<Batch>> {
    if batch_len < 2 {
        return Err(Error::BatchLenTooSmall { got: batch_len });
    }
    if test.is_empty() {
        return Err(Error::EmptyTestRange);
    }
    let mut batches = Vec::new();
    let mut start = test.start;
    while start < test.end {
        let end = (start + batch_len).min(test.end);
        batches.push(Batch {
            index: batches.len(),
            start,
            end,
        });
        start = end;
    }
    if batches.len() >= 2 {
        let last = *batches.last().expect("non-empty");
        if last.len() < 2 {
            batches.pop();
            let prev = batches.last_mut().expect("non-empty");
            prev.end = last.end;
        }
    }
    Ok(batches)
}

/// Maximal runs of set labels, in increasing start order.
pub fn segments_from_labels(labels: &[bool]) -> Vec<AnomalySegment> {
    let mut segments = Vec::new();
    let mut run_start = None;
    for (i, &flag) in labels.iter().enumerate() {
        match (flag, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                segments.push(AnomalySegment { start: s, end: i - 1 });
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        segments.push(AnomalySegment {
            start: s,
            end: labels.len() - 1,
        });
    }
    segments
}

/// Values of `range` with labeled anomalies replaced by linear interpolation
/// between the nearest non-anomalous neighbors inside the range.
///
/// Leading/trailing anomalous runs take the nearest non-anomalous value.
pub fn remove_anomalies_interpolate(
    series: &LabeledSeries,
    range: Range<usize>,
) -> Result<Vec<f64>> {
    let values = series.values(range.clone());
    let labels = &series.labels()[range];
    interpolate_labeled(&values, labels)
}

/// Slice-level form of [`remove_anomalies_interpolate`].
pub fn interpolate_labeled(values: &[f64], labels: &[bool]) -> Result<Vec<f64>> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: labels.len(),
        });
    }
    if labels.iter().all(|&l| l) {
        return Err(Error::NoCleanData);
    }
    let mut out = values.to_vec();
    let n = values.len();
    let mut i = 0;
    while i < n {
        if !labels[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && labels[i] {
            i += 1;
        }
        let run_end = i; // exclusive
        let left = run_start.checked_sub(1).filter(|&l| !labels[l]);
        let right = (run_end < n).then_some(run_end);
        match (left, right) {
            (Some(l), Some(r)) => {
                let span = (r - l) as f64;
                for (j, slot) in out[run_start..run_end].iter_mut().enumerate() {
                    let t = (run_start + j - l) as f64 / span;
                    *slot = values[l] + t * (values[r] - values[l]);
                }
            }
            (Some(l), None) => out[run_start..run_end].fill(values[l]),
            (None, Some(r)) => out[run_start..run_end].fill(values[r]),
            (None, None) => unreachable!("all-anomalous range rejected above"),
        }
    }
    Ok(out)
}
