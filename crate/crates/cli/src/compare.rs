//! Compare two summary reports with paired Wilcoxon tests per metric.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use driftbench_core::error::Error;
use driftbench_core::eval::{wilcoxon_signed_rank, MetricTriple};
use driftbench_core::report::SummaryJson;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    /// `ok` or `insufficient_pairs`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareOutput {
    pub scenario_a: String,
    pub scenario_b: String,
    pub alpha: f64,
    pub series_count: usize,
    pub results: Vec<MetricComparison>,
}

fn load_summary(path: &Path) -> Result<SummaryJson, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn pick_scenario<'a>(
    summary: &'a SummaryJson,
    requested: Option<&str>,
    which: &str,
) -> Result<(&'a str, &'a BTreeMap<String, MetricTriple>), CliError> {
    match requested {
        Some(name) => summary
            .scenarios
            .get_key_value(name)
            .map(|(k, v)| (k.as_str(), &v.per_series))
            .ok_or_else(|| {
                CliError::Config(format!(
                    "scenario '{name}' not present in report {which}; available: {}",
                    summary.scenarios.keys().cloned().collect::<Vec<_>>().join(", ")
                ))
            }),
        None => {
            if summary.scenarios.len() == 1 {
                let (k, v) = summary.scenarios.iter().next().expect("one scenario");
                Ok((k.as_str(), &v.per_series))
            } else {
                Err(CliError::Config(format!(
                    "report {which} holds {} scenarios; pick one with --scenario-{which}",
                    summary.scenarios.len()
                )))
            }
        }
    }
}

/// Paired Wilcoxon comparison of two summary reports. The reports must
/// cover identical series sets; all-zero differences surface as a clean
/// `insufficient_pairs` status rather than a failure.
pub fn cmd_compare(
    report_a: &Path,
    report_b: &Path,
    alpha: f64,
    scenario_a: Option<&str>,
    scenario_b: Option<&str>,
) -> Result<CompareOutput, CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Config(format!("alpha {alpha} must be in (0, 1)")));
    }
    let summary_a = load_summary(report_a)?;
    let summary_b = load_summary(report_b)?;
    let (name_a, per_series_a) = pick_scenario(&summary_a, scenario_a, "a")?;
    let (name_b, per_series_b) = pick_scenario(&summary_b, scenario_b, "b")?;

    if !per_series_a.keys().eq(per_series_b.keys()) {
        let only_a: Vec<&String> = per_series_a
            .keys()
            .filter(|k| !per_series_b.contains_key(*k))
            .collect();
        let only_b: Vec<&String> = per_series_b
            .keys()
            .filter(|k| !per_series_a.contains_key(*k))
            .collect();
        return Err(CliError::Data(format!(
            "reports cover different series sets; only in a: {only_a:?}, only in b: {only_b:?}"
        )));
    }

    type MetricGetter = fn(&MetricTriple) -> f64;
    let metric_values: [(&str, MetricGetter); 3] = [
        ("f1", |m| m.f1),
        ("precision", |m| m.precision),
        ("recall", |m| m.recall),
    ];
    let mut results = Vec::with_capacity(3);
    for (metric, get) in metric_values {
        let va: Vec<f64> = per_series_a.values().map(get).collect();
        let vb: Vec<f64> = per_series_b.values().map(get).collect();
        let entry = match wilcoxon_signed_rank(&va, &vb, alpha) {
            Ok(test) => MetricComparison {
                metric: metric.into(),
                status: "ok".into(),
                w: Some(test.w),
                p_value: Some(test.p_value),
                significant: test.significant,
            },
            Err(Error::InsufficientPairs { .. }) => MetricComparison {
                metric: metric.into(),
                status: "insufficient_pairs".into(),
                w: None,
                p_value: None,
                significant: false,
            },
            Err(other) => return Err(CliError::Data(other.to_string())),
        };
        results.push(entry);
    }
    Ok(CompareOutput {
        scenario_a: name_a.to_string(),
        scenario_b: name_b.to_string(),
        alpha,
        series_count: per_series_a.len(),
        results,
    })
}
