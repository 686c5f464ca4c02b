//! Delay-adjusted scoring, precision/recall/F1, aggregation, and the
//! Wilcoxon signed-rank test.
//!
//! The delay rule credits a whole ground-truth segment when any prediction
//! falls within its first `delay + 1` points; a segment detected too late
//! counts as fully missed (its raw in-segment positives are zeroed, so they
//! are neither true nor false positives). Bits outside segments are never
//! touched.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fedd::DriftSignal;
use crate::fedd::EcddStatus;
use crate::series::segments_from_labels;

/// Pointwise confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merged(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

/// Precision, recall, and F1 with the 0/0 -> 0 convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Maximum tolerable in-segment detection delay, in points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayConfig {
    pub delay: usize,
}

/// Apply the delay rule to raw predictions.
pub fn adjust_predictions(labels: &[bool], preds: &[bool], delay: usize) -> Result<Vec<bool>> {
    if labels.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: preds.len(),
        });
    }
    let mut adjusted = preds.to_vec();
    for seg in segments_from_labels(labels) {
        let window_end = seg.end.min(seg.start + delay);
        let detected = preds[seg.start..=window_end].iter().any(|&p| p);
        adjusted[seg.start..=seg.end].fill(detected);
    }
    Ok(adjusted)
}

/// Pointwise confusion counts of adjusted predictions against labels.
pub fn confusion(labels: &[bool], adjusted_preds: &[bool]) -> Result<ConfusionCounts> {
    if labels.len() != adjusted_preds.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: adjusted_preds.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&l, &p) in labels.iter().zip(adjusted_preds) {
        match (l, p) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Precision/recall/F1 from confusion counts.
pub fn metrics(c: &ConfusionCounts) -> MetricTriple {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MetricTriple {
        precision,
        recall,
        f1,
    }
}

/// Metrics of the same predictions at each delay `0..=max_delay`.
pub fn delay_curve(labels: &[bool], preds: &[bool], max_delay: usize) -> Result<Vec<MetricTriple>> {
    (0..=max_delay)
        .map(|d| {
            let adjusted = adjust_predictions(labels, preds, d)?;
            Ok(metrics(&confusion(labels, &adjusted)?))
        })
        .collect()
}

/// Unweighted arithmetic mean per metric. Mean F1 is the mean of per-series
/// F1 values, not the F1 of pooled confusion counts.
pub fn aggregate(per_series: &[MetricTriple]) -> Result<MetricTriple> {
    if per_series.is_empty() {
        return Err(Error::EmptyInput("aggregate over zero series"));
    }
    let n = per_series.len() as f64;
    Ok(MetricTriple {
        precision: per_series.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: per_series.iter().map(|m| m.recall).sum::<f64>() / n,
        f1: per_series.iter().map(|m| m.f1).sum::<f64>() / n,
    })
}

/// Outcome of a two-sided Wilcoxon signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonTest {
    /// Classical W: the smaller of the positive/negative rank sums.
    pub w: f64,
    pub p_value: f64,
    pub significant: bool,
    /// Pairs remaining after dropping zero differences.
    pub n_used: usize,
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped; ties share average ranks. The null
/// distribution is exact (rank-sum counting) for n <= 20 and a normal
/// approximation with continuity and tie corrections above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<WilcoxonTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x - y)
        .filter(|&d| d != 0.0)
        .collect();
    let n = diffs.len();
    if n < 5 {
        return Err(Error::InsufficientPairs { n });
    }

    // Rank |d| ascending with average ranks for ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().partial_cmp(&diffs[j].abs()).expect("finite"));
    let mut ranks = vec![0.0; n];
    let mut tie_groups: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let avg_rank = (i + j + 2) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..=j] {
            ranks[idx] = avg_rank;
        }
        tie_groups.push(j - i + 1);
        i = j + 1;
    }

    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(&d, _)| d > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let total: f64 = ranks.iter().sum();
    let w_minus = total - w_plus;
    let w = w_plus.min(w_minus);

    let p_value = if n <= 20 {
        exact_two_sided_p(&ranks, w_plus)
    } else {
        normal_two_sided_p(n, &tie_groups, w_plus)
    };
    Ok(WilcoxonTest {
        w,
        p_value,
        significant: p_value < alpha,
        n_used: n,
    })
}

/// Exact two-sided p-value: 2 * min(P(T <= t), P(T >= t)) capped at 1, with
/// T the positive-rank sum under random signs.
///
/// Ranks (average ranks included) are multiples of 1/2, so doubling them
/// gives integers and the distribution is counted by subset-sum over
/// doubled ranks.
fn exact_two_sided_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|&r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max_sum + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in &doubled {
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total: f64 = 2f64.powi(ranks.len() as i32);
    let t_obs = (2.0 * w_plus).round() as usize;
    let p_le: f64 = counts[..=t_obs].iter().sum::<f64>() / total;
    let p_ge: f64 = counts[t_obs..].iter().sum::<f64>() / total;
    (2.0 * p_le.min(p_ge)).min(1.0)
}

/// Normal approximation with continuity correction and tie-corrected
/// variance.
fn normal_two_sided_p(n: usize, tie_groups: &[usize], w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_groups
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let centered = w_plus - mean;
    let correction = 0.5 * centered.signum();
    let z = (centered - correction) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0)
}

/// Paired comparison of one metric between two scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub scenario_a: String,
    pub scenario_b: String,
    /// Per-series paired metric values (a_i, b_i), in series order.
    pub pairs: Vec<(f64, f64)>,
    pub w: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Run the signed-rank test on per-series paired metric values.
pub fn compare_scenarios(
    scenario_a: &str,
    values_a: &[f64],
    scenario_b: &str,
    values_b: &[f64],
    alpha: f64,
) -> Result<ComparisonResult> {
    let test = wilcoxon_signed_rank(values_a, values_b, alpha)?;
    Ok(ComparisonResult {
        scenario_a: scenario_a.to_string(),
        scenario_b: scenario_b.to_string(),
        pairs: values_a.iter().copied().zip(values_b.iter().copied()).collect(),
        w: test.w,
        p_value: test.p_value,
        significant: test.significant,
    })
}

/// Fraction of series in drift state per period. Series lacking a period are
/// excluded from that period's denominator.
pub fn drift_period_summary(per_series: &[Vec<DriftSignal>]) -> Vec<f64> {
    let max_periods = per_series.iter().map(Vec::len).max().unwrap_or(0);
    (0..max_periods)
        .map(|p| {
            let present = per_series.iter().filter(|s| p < s.len()).count();
            if present == 0 {
                return 0.0;
            }
            let drift = per_series
                .iter()
                .filter(|s| p < s.len() && s[p].status == EcddStatus::Drift)
                .count();
            drift as f64 / present as f64
        })
        .collect()
}
