//! Experiment configuration: a single JSON file validated up front.
//! The schema is documented in docs/config.md.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use driftbench_core::detectors::DetectorParams;
use driftbench_core::fedd::FeddConfig;
use driftbench_core::harness::{DataRegime, FrequencyRegime};
use driftbench_core::ingest::SynthSpec;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    YahooA1 {
        path: PathBuf,
    },
    NabCloudwatch {
        csv_dir: PathBuf,
        labels_file: PathBuf,
    },
    Synthetic {
        specs: Vec<SynthSpec>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataRegimeKind {
    Static,
    FullHistory,
    SlidingWindow,
}

/// One scenario: a data regime paired with a retraining frequency.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub data: DataRegimeKind,
    /// Sliding-window length; defaults to the initial training length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_len: Option<usize>,
    pub frequency: FrequencyRegime,
}

impl RegimeConfig {
    /// Stable scenario name used in reports and file names.
    pub fn scenario_name(&self) -> String {
        let freq = match self.frequency {
            FrequencyRegime::Blind => "blind",
            FrequencyRegime::Informed => "informed",
        };
        match self.data {
            DataRegimeKind::Static => "static".to_string(),
            DataRegimeKind::FullHistory => format!("fh-{freq}"),
            DataRegimeKind::SlidingWindow => format!("sw-{freq}"),
        }
    }

    /// Resolve to the harness regime, defaulting the sliding window to the
    /// initial training length.
    pub fn data_regime(&self, train_len: usize) -> DataRegime {
        match self.data {
            DataRegimeKind::Static => DataRegime::Static,
            DataRegimeKind::FullHistory => DataRegime::FullHistory,
            DataRegimeKind::SlidingWindow => DataRegime::SlidingWindow {
                window_len: self.window_len.unwrap_or(train_len),
            },
        }
    }
}

fn default_alpha() -> f64 {
    0.10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub detector: DetectorParams,
    pub regimes: Vec<RegimeConfig>,
    pub batch_len: usize,
    pub delays: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// FEDD monitor constants; required when any regime is informed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fedd: Option<FeddConfig>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse and validate a config file. Parse failures carry serde's
    /// line/column; invariant failures name the offending JSON path.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let diagnostics = config.validate();
        if !diagnostics.is_empty() {
            return Err(CliError::Config(diagnostics.join("\n")));
        }
        Ok((config, bytes))
    }

    /// All invariant violations, one line each, empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.batch_len < 2 {
            out.push("batch_len must be >= 2".to_string());
        }
        if self.regimes.is_empty() {
            out.push("regimes must list at least one regime".to_string());
        }
        if self.delays.is_empty() {
            out.push("delays must list at least one delay".to_string());
        }
        if self.seeds.is_empty() {
            out.push("seeds must list at least one seed".to_string());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(format!("alpha {} must be in (0, 1)", self.alpha));
        }
        if let Err(e) = self.detector.validate() {
            out.push(format!("detector: {e}"));
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, regime) in self.regimes.iter().enumerate() {
            if regime.frequency == FrequencyRegime::Informed && self.fedd.is_none() {
                out.push(format!(
                    "regimes[{i}].frequency is informed but the fedd section is missing"
                ));
            }
            if regime.window_len.is_some() && regime.data != DataRegimeKind::SlidingWindow {
                out.push(format!(
                    "regimes[{i}].window_len is only valid with data = sliding_window"
                ));
            }
            if let Some(w) = regime.window_len {
                if w < 2 {
                    out.push(format!("regimes[{i}].window_len must be >= 2"));
                }
            }
            if !names.insert(regime.scenario_name()) {
                out.push(format!(
                    "regimes[{i}] duplicates scenario '{}'",
                    regime.scenario_name()
                ));
            }
        }
        if let Some(fedd) = &self.fedd {
            if let Err(e) = fedd.ecdd.validate() {
                out.push(format!("fedd: {e}"));
            }
        }
        if let DatasetConfig::Synthetic { specs } = &self.dataset {
            if specs.is_empty() {
                out.push("dataset.specs must list at least one spec".to_string());
            }
            for (i, spec) in specs.iter().enumerate() {
                if let Err(e) = spec.validate() {
                    out.push(format!("dataset.specs[{i}]: {e}"));
                }
            }
            let mut ids = std::collections::BTreeSet::new();
            for (i, spec) in specs.iter().enumerate() {
                if !ids.insert(&spec.id) {
                    out.push(format!("dataset.specs[{i}].id '{}' is duplicated", spec.id));
                }
            }
        }
        out
    }

    pub fn has_informed_regime(&self) -> bool {
        self.regimes
            .iter()
            .any(|r| r.frequency == FrequencyRegime::Informed)
    }
}
