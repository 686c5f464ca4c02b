//! NAB realAWSCloudwatch loader.
//!
//! Series CSVs carry header `timestamp,value` with ISO-style timestamps at
//! 5-minute granularity. Ground-truth labels come from a combined JSON file
//! mapping a relative series path to the anomalous timestamps; only the
//! listed starting points are labeled.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::ingest::{assemble_series, RawSeries};
use crate::series::LabeledSeries;

pub const NAB_GRANULARITY_S: u64 = 300;

/// Parse `2014-02-14 14:27:00`-style timestamps (optionally with `T` and
/// fractional seconds) as UTC epoch seconds.
fn parse_timestamp(raw: &str) -> Option<i64> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
    ];
    let raw = raw.trim();
    FORMATS
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(raw, fmt).ok())
        .map(|dt| dt.and_utc().timestamp())
}

/// Load every `*.csv` in `csv_dir` with ground-truth labels from
/// `labels_file`, sorted by series id.
pub fn load_nab_cloudwatch(csv_dir: &Path, labels_file: &Path) -> Result<Vec<LabeledSeries>> {
    let labels_raw = fs::read_to_string(labels_file)?;
    let labels_by_path: HashMap<String, Vec<String>> = serde_json::from_str(&labels_raw)
        .map_err(|source| Error::Json {
            file: labels_file.display().to_string(),
            source,
        })?;
    // Keys are relative paths like "realAWSCloudwatch/ec2_....csv"; index by
    // final component so the CSV directory can sit anywhere.
    let mut labels_by_name: HashMap<String, &[String]> = HashMap::new();
    for (key, stamps) in &labels_by_path {
        let name = key.rsplit('/').next().unwrap_or(key).to_string();
        labels_by_name.insert(name, stamps);
    }

    let mut files: Vec<_> = fs::read_dir(csv_dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidSpec(format!(
            "no CSV files found in {}",
            csv_dir.display()
        )));
    }

    files
        .iter()
        .map(|path| {
            let name = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let stamps = labels_by_name.get(&name).copied().unwrap_or(&[]);
            load_file(path, stamps)
        })
        .collect()
}

fn load_file(path: &Path, label_stamps: &[String]) -> Result<LabeledSeries> {
    let file = path.display().to_string();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| file.clone());
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::ParseRow {
        file: file.clone(),
        line: 1,
        reason: "empty file".into(),
    })?;
    if header.trim() != "timestamp,value" {
        return Err(Error::ParseRow {
            file,
            line: 1,
            reason: format!("unexpected header '{header}', want 'timestamp,value'"),
        });
    }

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let row = line.trim();
        if row.is_empty() {
            continue;
        }
        let bad = |reason: String| Error::ParseRow {
            file: file.clone(),
            line: line_no,
            reason,
        };
        let Some((ts, val)) = row.split_once(',') else {
            return Err(bad(format!("expected 2 columns, got '{row}'")));
        };
        let timestamp =
            parse_timestamp(ts).ok_or_else(|| bad(format!("invalid timestamp '{ts}'")))?;
        let value: f64 = val
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid value '{val}'")))?;
        if !value.is_finite() {
            return Err(bad(format!("non-finite value '{val}'")));
        }
        timestamps.push(timestamp);
        values.push(value);
    }

    let n = values.len();
    let series = assemble_series(
        RawSeries {
            id: id.clone(),
            file,
            timestamps,
            values,
            labels: vec![false; n],
        },
        NAB_GRANULARITY_S,
    )?;

    // Re-apply ground-truth labels on the repaired timeline.
    let mut labels = vec![false; series.len()];
    for stamp in label_stamps {
        let epoch = parse_timestamp(stamp).ok_or_else(|| Error::InvalidSpec(format!(
            "invalid label timestamp '{stamp}' for series '{id}'"
        )))?;
        let pos = series
            .points()
            .binary_search_by_key(&epoch, |p| p.timestamp)
            .map_err(|_| Error::LabelTimestampNotFound {
                series: id.clone(),
                timestamp: epoch,
            })?;
        labels[pos] = true;
    }
    let points = series.points().to_vec();
    LabeledSeries::new(id, NAB_GRANULARITY_S, points, labels)
}
