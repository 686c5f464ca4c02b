//! Experiment report assembly and rendering.
//!
//! Renderers produce deterministic text: rows are sorted, maps are ordered,
//! and floats are printed with fixed precision, so identical runs yield
//! byte-identical CSV and JSON bodies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{
    adjust_predictions, aggregate, confusion, metrics, wilcoxon_signed_rank, ConfusionCounts,
    MetricTriple,
};
use crate::fedd::{DriftSignal, EcddStatus};
use crate::harness::{RetrainTrigger, RunRecord};
use crate::series::LabeledSeries;

type MetricGetter = fn(&MetricTriple) -> f64;
const METRIC_GETTERS: [(&str, MetricGetter); 3] = [
    ("f1", |m| m.f1),
    ("precision", |m| m.precision),
    ("recall", |m| m.recall),
];

/// All runs of one scenario, one record per series.
#[derive(Debug, Clone)]
pub struct ScenarioRuns {
    pub scenario: String,
    pub records: Vec<RunRecord>,
}

/// One per-series metrics row; `batch` is `None` for the pooled row that
/// concatenates every test batch of the series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesMetricsRow {
    pub series_id: String,
    pub scenario: String,
    pub batch: Option<usize>,
    pub counts: ConfusionCounts,
    pub metrics: MetricTriple,
}

/// Scenario-level mean of a metric triple at one delay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelayCurveRow {
    pub scenario: String,
    pub delay: usize,
    pub mean: MetricTriple,
}

/// One Wilcoxon comparison between two scenarios on one metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub a: String,
    pub b: String,
    pub metric: String,
    /// `ok` or `insufficient_pairs` (fewer than 5 non-zero differences).
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub significant: bool,
}

/// Scenario summary: cross-series means plus the per-series values they
/// average (keyed by series id).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub mean: MetricTriple,
    pub per_series: BTreeMap<String, MetricTriple>,
}

/// The complete evaluation of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Delay used for the per-series rows and scenario means.
    pub delay: usize,
    /// Significance level of the comparisons.
    pub alpha: f64,
    pub scenarios: BTreeMap<String, ScenarioSummary>,
    pub comparisons: Vec<ComparisonEntry>,
    pub rows: Vec<SeriesMetricsRow>,
    pub delay_curves: Vec<DelayCurveRow>,
    /// Fraction of series in drift state per period, when a monitor ran.
    pub drift_summary: Vec<f64>,
}

fn pooled_row(
    series: &LabeledSeries,
    record: &RunRecord,
    scenario: &str,
    delay: usize,
) -> Result<SeriesMetricsRow> {
    let test = record.test_range();
    let labels = &series.labels()[test];
    let preds = record.pooled_predictions();
    let adjusted = adjust_predictions(labels, &preds, delay)?;
    let counts = confusion(labels, &adjusted)?;
    Ok(SeriesMetricsRow {
        series_id: record.series_id.clone(),
        scenario: scenario.to_string(),
        batch: None,
        counts,
        metrics: metrics(&counts),
    })
}

fn batch_rows(
    series: &LabeledSeries,
    record: &RunRecord,
    scenario: &str,
    delay: usize,
) -> Result<Vec<SeriesMetricsRow>> {
    record
        .batches
        .iter()
        .zip(&record.batch_predictions)
        .map(|(batch, preds)| {
            let labels = &series.labels()[batch.range()];
            let adjusted = adjust_predictions(labels, preds, delay)?;
            let counts = confusion(labels, &adjusted)?;
            Ok(SeriesMetricsRow {
                series_id: record.series_id.clone(),
                scenario: scenario.to_string(),
                batch: Some(batch.index),
                counts,
                metrics: metrics(&counts),
            })
        })
        .collect()
}

/// Assemble the full report from per-scenario run records.
///
/// Per-series metrics pool all test-batch predictions of the series (the
/// per-batch rows are also emitted). Scenario means average the pooled
/// per-series values at `delays[0]`; the delay curves cover every delay in
/// `delays`. Comparisons run the signed-rank test on pooled per-series
/// values for every scenario pair and metric; pairs with fewer than 5
/// non-zero differences are reported as `insufficient_pairs` and not
/// significant.
pub fn build_report(
    series_list: &[LabeledSeries],
    scenarios: &[ScenarioRuns],
    delays: &[usize],
    alpha: f64,
) -> Result<ExperimentReport> {
    if delays.is_empty() {
        return Err(Error::EmptyInput("delay list"));
    }
    if scenarios.is_empty() {
        return Err(Error::EmptyInput("scenario list"));
    }
    let by_id: BTreeMap<&str, &LabeledSeries> =
        series_list.iter().map(|s| (s.id(), s)).collect();
    let lookup = |id: &str| {
        by_id.get(id).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("run record references unknown series '{id}'"))
        })
    };
    let primary_delay = delays[0];

    let mut rows = Vec::new();
    let mut delay_curves = Vec::new();
    let mut summaries: BTreeMap<String, ScenarioSummary> = BTreeMap::new();
    for scenario in scenarios {
        let mut per_series = BTreeMap::new();
        for record in &scenario.records {
            let series = lookup(&record.series_id)?;
            let pooled = pooled_row(series, record, &scenario.scenario, primary_delay)?;
            per_series.insert(record.series_id.clone(), pooled.metrics);
            rows.push(pooled);
            rows.extend(batch_rows(series, record, &scenario.scenario, primary_delay)?);
        }
        let mean = aggregate(&per_series.values().copied().collect::<Vec<_>>())?;
        summaries.insert(
            scenario.scenario.clone(),
            ScenarioSummary { mean, per_series },
        );

        for &delay in delays {
            let mut triples = Vec::with_capacity(scenario.records.len());
            for record in &scenario.records {
                let series = lookup(&record.series_id)?;
                triples.push(pooled_row(series, record, &scenario.scenario, delay)?.metrics);
            }
            delay_curves.push(DelayCurveRow {
                scenario: scenario.scenario.clone(),
                delay,
                mean: aggregate(&triples)?,
            });
        }
    }
    rows.sort_by(|a, b| {
        (&a.scenario, &a.series_id, a.batch.map_or(-1i64, |x| x as i64)).cmp(&(
            &b.scenario,
            &b.series_id,
            b.batch.map_or(-1i64, |x| x as i64),
        ))
    });
    delay_curves.sort_by(|a, b| (&a.scenario, a.delay).cmp(&(&b.scenario, b.delay)));

    let names: Vec<&String> = summaries.keys().collect();
    let mut comparisons = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            comparisons.extend(compare_pair(
                names[i],
                &summaries[names[i]],
                names[j],
                &summaries[names[j]],
                alpha,
            )?);
        }
    }

    let drift_summary = drift_summary_from(scenarios);

    Ok(ExperimentReport {
        delay: primary_delay,
        alpha,
        scenarios: summaries,
        comparisons,
        rows,
        delay_curves,
        drift_summary,
    })
}

fn compare_pair(
    name_a: &str,
    a: &ScenarioSummary,
    name_b: &str,
    b: &ScenarioSummary,
    alpha: f64,
) -> Result<Vec<ComparisonEntry>> {
    if !a.per_series.keys().eq(b.per_series.keys()) {
        return Err(Error::InvalidParameter(format!(
            "scenarios '{name_a}' and '{name_b}' cover different series sets"
        )));
    }
    let mut out = Vec::with_capacity(3);
    for (metric, get) in METRIC_GETTERS {
        let va: Vec<f64> = a.per_series.values().map(get).collect();
        let vb: Vec<f64> = b.per_series.values().map(get).collect();
        let entry = match wilcoxon_signed_rank(&va, &vb, alpha) {
            Ok(test) => ComparisonEntry {
                a: name_a.to_string(),
                b: name_b.to_string(),
                metric: metric.to_string(),
                status: "ok".into(),
                w: Some(test.w),
                p_value: Some(test.p_value),
                significant: test.significant,
            },
            Err(Error::InsufficientPairs { .. }) => ComparisonEntry {
                a: name_a.to_string(),
                b: name_b.to_string(),
                metric: metric.to_string(),
                status: "insufficient_pairs".into(),
                w: None,
                p_value: None,
                significant: false,
            },
            Err(other) => return Err(other),
        };
        out.push(entry);
    }
    Ok(out)
}

/// Drift summary across the first scenario that carries signals; signals
/// depend only on the series and batching, not on the data regime.
fn drift_summary_from(scenarios: &[ScenarioRuns]) -> Vec<f64> {
    for scenario in scenarios {
        let per_series: Vec<Vec<DriftSignal>> = scenario
            .records
            .iter()
            .filter_map(|r| r.drift_signals.clone())
            .collect();
        if !per_series.is_empty() {
            return crate::eval::drift_period_summary(&per_series);
        }
    }
    Vec::new()
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

impl ExperimentReport {
    /// `series_id,scenario,batch,tp,fp,fn,tn,precision,recall,f1`; the
    /// pooled row of a series carries batch `all`.
    pub fn per_series_csv(&self) -> String {
        let mut out = String::from("series_id,scenario,batch,tp,fp,fn,tn,precision,recall,f1\n");
        for r in &self.rows {
            let batch = r.batch.map_or_else(|| "all".to_string(), |b| b.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.series_id,
                r.scenario,
                batch,
                r.counts.tp,
                r.counts.fp,
                r.counts.fn_,
                r.counts.tn,
                fmt(r.metrics.precision),
                fmt(r.metrics.recall),
                fmt(r.metrics.f1),
            ));
        }
        out
    }

    /// `scenario,delay,precision,recall,f1` per configured delay.
    pub fn delay_curve_csv(&self) -> String {
        let mut out = String::from("scenario,delay,precision,recall,f1\n");
        for r in &self.delay_curves {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.scenario,
                r.delay,
                fmt(r.mean.precision),
                fmt(r.mean.recall),
                fmt(r.mean.f1),
            ));
        }
        out
    }

    /// `period,fraction` per monitored period.
    pub fn drift_summary_csv(&self) -> String {
        let mut out = String::from("period,fraction\n");
        for (period, fraction) in self.drift_summary.iter().enumerate() {
            out.push_str(&format!("{period},{}\n", fmt(*fraction)));
        }
        out
    }

    /// Summary JSON body (pretty-printed, deterministic key order).
    pub fn summary_json(&self) -> String {
        let summary = SummaryJson {
            delay: self.delay,
            alpha: self.alpha,
            scenarios: self.scenarios.clone(),
            comparisons: self.comparisons.clone(),
            drift_summary: self.drift_summary.clone(),
        };
        serde_json::to_string_pretty(&summary).expect("report serializes") + "\n"
    }
}

/// The on-disk summary schema (also what `compare` consumes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryJson {
    pub delay: usize,
    pub alpha: f64,
    pub scenarios: BTreeMap<String, ScenarioSummary>,
    pub comparisons: Vec<ComparisonEntry>,
    #[serde(default)]
    pub drift_summary: Vec<f64>,
}

/// `series_id,batch_index,trigger,train_start,train_end` for one scenario's
/// retrain events, ordered by (series, batch).
pub fn retrain_events_csv(records: &[RunRecord]) -> String {
    let mut rows: Vec<(String, usize, RetrainTrigger, usize, usize)> = records
        .iter()
        .flat_map(|r| {
            r.retrain_events.iter().map(|e| {
                (
                    r.series_id.clone(),
                    e.batch_index,
                    e.trigger,
                    e.train_range.start,
                    e.train_range.end,
                )
            })
        })
        .collect();
    rows.sort();
    let mut out = String::from("series_id,batch_index,trigger,train_start,train_end\n");
    for (series_id, batch_index, trigger, start, end) in rows {
        let trigger = match trigger {
            RetrainTrigger::Schedule => "schedule",
            RetrainTrigger::Drift => "drift",
        };
        out.push_str(&format!("{series_id},{batch_index},{trigger},{start},{end}\n"));
    }
    out
}

/// `series_id,batch_index,status` for every drift signal, ordered by
/// (series, batch).
pub fn drift_signals_csv(records: &[RunRecord]) -> String {
    let mut rows: Vec<(String, usize, EcddStatus)> = records
        .iter()
        .filter_map(|r| r.drift_signals.as_ref())
        .flatten()
        .map(|s| (s.series_id.clone(), s.batch_index, s.status))
        .collect();
    rows.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    rows.dedup();
    let mut out = String::from("series_id,batch_index,status\n");
    for (series_id, batch_index, status) in rows {
        let status = match status {
            EcddStatus::Stable => "stable",
            EcddStatus::Warning => "warning",
            EcddStatus::Drift => "drift",
        };
        out.push_str(&format!("{series_id},{batch_index},{status}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{DetectorParams, FftParams};
    use crate::harness::{run_series, DataRegime, FrequencyRegime};
    use crate::ingest::{generate_synthetic, BaseSignal, SynthSpec};
    use crate::series::SplitSpec;

    fn corpus(n: usize) -> Vec<LabeledSeries> {
        (0..n)
            .map(|seed| {
                generate_synthetic(&SynthSpec {
                    id: format!("r-{seed:02}"),
                    length: 800,
                    granularity_s: 3600,
                    base: BaseSignal {
                        level: 10.0,
                        trend: 0.0,
                        season_amplitude: 0.0,
                        season_period: 24,
                    },
                    noise_sigma: 1.0,
                    anomalies: vec![crate::ingest::AnomalySpec {
                        at: 500 + seed * 7,
                        kind: crate::ingest::AnomalyKind::Spike,
                        magnitude: 12.0,
                    }],
                    drift: None,
                    seed: seed as u64,
                })
                .unwrap()
            })
            .collect()
    }

    fn runs(series: &[LabeledSeries], scenario: &str, regime: DataRegime) -> ScenarioRuns {
        let records = series
            .iter()
            .map(|s| {
                run_series(
                    s,
                    &DetectorParams::Fft(FftParams::default()),
                    regime,
                    FrequencyRegime::Blind,
                    SplitSpec {
                        train_len: 400,
                        batch_len: 100,
                    },
                    None,
                    0,
                )
                .unwrap()
            })
            .collect();
        ScenarioRuns {
            scenario: scenario.to_string(),
            records,
        }
    }

    #[test]
    fn report_headers_and_shape_are_stable() {
        let series = corpus(6);
        let scenarios = vec![
            runs(&series, "static", DataRegime::Static),
            runs(&series, "fh-blind", DataRegime::FullHistory),
        ];
        let report = build_report(&series, &scenarios, &[0, 1, 2], 0.10).unwrap();
        let csv = report.per_series_csv();
        assert!(csv.starts_with(
            "series_id,scenario,batch,tp,fp,fn,tn,precision,recall,f1\n"
        ));
        // 6 series x 2 scenarios x (1 pooled + 4 batches)
        assert_eq!(csv.lines().count(), 1 + 6 * 2 * 5);
        assert!(report
            .delay_curve_csv()
            .starts_with("scenario,delay,precision,recall,f1\n"));
        assert_eq!(report.delay_curves.len(), 2 * 3);
        assert!(report.drift_summary_csv().starts_with("period,fraction\n"));
        // 2 scenarios -> 1 pair x 3 metrics
        assert_eq!(report.comparisons.len(), 3);
        let json = report.summary_json();
        let parsed: SummaryJson = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.scenarios.len(), 2);
    }

    #[test]
    fn identical_scenarios_compare_as_insufficient_pairs() {
        let series = corpus(5);
        let scenarios = vec![
            runs(&series, "a", DataRegime::Static),
            runs(&series, "b", DataRegime::Static),
        ];
        let report = build_report(&series, &scenarios, &[0], 0.10).unwrap();
        assert!(report
            .comparisons
            .iter()
            .all(|c| c.status == "insufficient_pairs" && !c.significant));
    }

    #[test]
    fn report_rendering_is_deterministic() {
        let series = corpus(4);
        let scenarios = vec![runs(&series, "static", DataRegime::Static)];
        let a = build_report(&series, &scenarios, &[0, 3], 0.10).unwrap();
        let b = build_report(&series, &scenarios, &[0, 3], 0.10).unwrap();
        assert_eq!(a.per_series_csv(), b.per_series_csv());
        assert_eq!(a.summary_json(), b.summary_json());
        assert_eq!(a.delay_curve_csv(), b.delay_curve_csv());
    }

    #[test]
    fn retrain_csv_lists_events() {
        let series = corpus(2);
        let scenario = runs(&series, "fh", DataRegime::FullHistory);
        let csv = retrain_events_csv(&scenario.records);
        assert!(csv.starts_with("series_id,batch_index,trigger,train_start,train_end\n"));
        // 4 batches -> 3 retrains per series, 2 series
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.contains(",schedule,"));
    }
}
