//! Experiment execution: load the dataset, run every scenario over every
//! series (optionally in parallel), and write the report files.
//!
//! Output bytes are deterministic for a fixed config regardless of the job
//! count; runs are collected and sorted before any aggregation. Only the
//! manifest carries timestamps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use driftbench_core::fedd::{DriftMonitor, FeddMonitor};
use driftbench_core::harness::{run_series, FrequencyRegime, RunRecord};
use driftbench_core::ingest::{
    generate_synthetic, load_nab_cloudwatch, load_yahoo_a1, mix_seed, SynthSpec,
};
use driftbench_core::report::{
    build_report, drift_signals_csv, retrain_events_csv, ScenarioRuns,
};
use driftbench_core::series::{LabeledSeries, SplitSpec};

use crate::config::{DatasetConfig, ExperimentConfig};
use crate::manifest::{config_hash, RunManifest};
use crate::CliError;

/// Result of a full experiment run.
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub series_run: usize,
    pub failed_series: usize,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed_series > 0 {
            3
        } else {
            0
        }
    }
}

/// Load the configured dataset. For synthetic datasets the corpus is the
/// cross product of specs and experiment seeds: each spec/seed pair yields
/// one series (id suffixed with the seed, generator seeded by mixing the
/// two). File-backed datasets are seed-invariant, as are the detectors.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Vec<LabeledSeries>, CliError> {
    let data = |e: driftbench_core::Error| CliError::Data(e.to_string());
    match &config.dataset {
        DatasetConfig::YahooA1 { path } => load_yahoo_a1(path).map_err(data),
        DatasetConfig::NabCloudwatch {
            csv_dir,
            labels_file,
        } => load_nab_cloudwatch(csv_dir, labels_file).map_err(data),
        DatasetConfig::Synthetic { specs } => {
            let mut series = Vec::with_capacity(specs.len() * config.seeds.len());
            for run_seed in &config.seeds {
                for spec in specs {
                    let mut spec: SynthSpec = spec.clone();
                    spec.id = format!("{}-s{run_seed}", spec.id);
                    spec.seed = mix_seed(spec.seed, *run_seed);
                    series.push(generate_synthetic(&spec).map_err(data)?);
                }
            }
            series.sort_by(|a, b| a.id().cmp(b.id()));
            Ok(series)
        }
    }
}

struct SeriesRunOutput {
    scenario_idx: usize,
    series_idx: usize,
    result: Result<RunRecord, String>,
}

/// Execute the whole experiment and write the report files into
/// `output_dir` (the config's unless overridden).
pub fn cmd_run(
    config_path: &Path,
    jobs: Option<usize>,
    output_override: Option<&Path>,
) -> Result<RunOutcome, CliError> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let (config, config_bytes) = ExperimentConfig::load(config_path)?;
    let series_list = load_dataset(&config)?;
    let output_dir = output_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output_dir.clone());

    let monitor: Option<FeddMonitor> = config.fedd.map(FeddMonitor::new);
    let scenarios: Vec<_> = config.regimes.clone();

    let mut tasks: Vec<(usize, usize)> = Vec::new();
    for scenario_idx in 0..scenarios.len() {
        for series_idx in 0..series_list.len() {
            tasks.push((scenario_idx, series_idx));
        }
    }

    let run_one = |&(scenario_idx, series_idx): &(usize, usize)| -> SeriesRunOutput {
        let series = &series_list[series_idx];
        let regime = &scenarios[scenario_idx];
        let train_len = series.len() / 2;
        let split = SplitSpec {
            train_len,
            batch_len: config.batch_len,
        };
        let monitor_ref: Option<&dyn DriftMonitor> = match regime.frequency {
            FrequencyRegime::Informed => monitor.as_ref().map(|m| m as &dyn DriftMonitor),
            FrequencyRegime::Blind => None,
        };
        let result = run_series(
            series,
            &config.detector,
            regime.data_regime(train_len),
            regime.frequency,
            split,
            monitor_ref,
            config.seeds.first().copied().unwrap_or(0),
        )
        .map_err(|e| e.to_string());
        SeriesRunOutput {
            scenario_idx,
            series_idx,
            result,
        }
    };

    let mut outputs: Vec<SeriesRunOutput> = match jobs {
        Some(1) => tasks.iter().map(run_one).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
            pool.install(|| tasks.par_iter().map(run_one).collect())
        }
        None => tasks.par_iter().map(run_one).collect(),
    };
    outputs.sort_by_key(|o| (o.scenario_idx, o.series_idx));

    // A series that failed under any scenario is excluded from the report
    // (comparisons need identical series sets) and recorded in the manifest.
    let mut series_status: BTreeMap<String, String> = series_list
        .iter()
        .map(|s| (s.id().to_string(), "ok".to_string()))
        .collect();
    for output in &outputs {
        if let Err(msg) = &output.result {
            let id = series_list[output.series_idx].id().to_string();
            log::warn!("series {id} failed: {msg}");
            series_status.insert(id, format!("failed: {msg}"));
        }
    }
    let failed_series = series_status.values().filter(|s| *s != "ok").count();
    if failed_series == series_list.len() {
        return Err(CliError::Data(
            "every series failed; no report to write".into(),
        ));
    }

    let mut scenario_runs: Vec<ScenarioRuns> = scenarios
        .iter()
        .map(|r| ScenarioRuns {
            scenario: r.scenario_name(),
            records: Vec::new(),
        })
        .collect();
    for output in outputs {
        let id = series_list[output.series_idx].id();
        if series_status[id] != "ok" {
            continue;
        }
        if let Ok(record) = output.result {
            scenario_runs[output.scenario_idx].records.push(record);
        }
    }

    let kept: Vec<LabeledSeries> = series_list
        .iter()
        .filter(|s| series_status[s.id()] == "ok")
        .cloned()
        .collect();
    let report = build_report(&kept, &scenario_runs, &config.delays, config.alpha)
        .map_err(|e| CliError::Data(e.to_string()))?;

    std::fs::create_dir_all(&output_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", output_dir.display())))?;
    let write = |name: &str, body: &str| -> Result<(), CliError> {
        let path = output_dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    };
    write("per_series.csv", &report.per_series_csv())?;
    write("summary.json", &report.summary_json())?;
    write("delay_curve.csv", &report.delay_curve_csv())?;
    if config.has_informed_regime() {
        write("drift_summary.csv", &report.drift_summary_csv())?;
        let informed_records: Vec<RunRecord> = scenario_runs
            .iter()
            .flat_map(|s| s.records.iter())
            .filter(|r| r.drift_signals.is_some())
            .cloned()
            .collect();
        write("drift_signals.csv", &drift_signals_csv(&informed_records))?;
    }
    for runs in &scenario_runs {
        write(
            &format!("retrain_events_{}.csv", runs.scenario),
            &retrain_events_csv(&runs.records),
        )?;
    }

    let manifest = RunManifest {
        config_sha256: config_hash(&config_bytes),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        series_status,
    };
    let manifest_body =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write("manifest.json", &manifest_body)?;

    Ok(RunOutcome {
        output_dir,
        series_run: kept.len(),
        failed_series,
    })
}

/// Generate one synthetic series and write it as Yahoo-format CSV.
pub fn cmd_synth(spec_path: &Path, out_path: &Path) -> Result<(), CliError> {
    let bytes = std::fs::read(spec_path)
        .map_err(|e| CliError::Config(format!("{}: {e}", spec_path.display())))?;
    let spec: SynthSpec = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", spec_path.display())))?;
    let series = generate_synthetic(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let mut body = String::from("timestamp,value,is_anomaly\n");
    for (point, &label) in series.points().iter().zip(series.labels()) {
        body.push_str(&format!(
            "{},{},{}\n",
            point.timestamp,
            point.value,
            u8::from(label)
        ));
    }
    std::fs::write(out_path, body)
        .map_err(|e| CliError::Data(format!("{}: {e}", out_path.display())))
}
