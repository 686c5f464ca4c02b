//! Yahoo A1 benchmark loader.
//!
//! One CSV per series with header `timestamp,value,is_anomaly`; UTF-8,
//! comma-separated, no quoting. Timestamps may be epoch seconds or plain
//! row indices (the published A1 files use 1,2,3,...); both are normalized
//! to epoch seconds at the 1-hour dataset granularity.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{assemble_series, RawSeries};
use crate::series::LabeledSeries;

pub const YAHOO_GRANULARITY_S: u64 = 3600;

/// Load every `*.csv` in `dir` as one labeled series, sorted by series id.
pub fn load_yahoo_a1(dir: &Path) -> Result<Vec<LabeledSeries>> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidSpec(format!(
            "no CSV files found in {}",
            dir.display()
        )));
    }
    files.iter().map(|path| load_file(path)).collect()
}

fn load_file(path: &Path) -> Result<LabeledSeries> {
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
    if header.trim() != "timestamp,value,is_anomaly" {
        return Err(Error::ParseRow {
            file,
            line: 1,
            reason: format!("unexpected header '{header}', want 'timestamp,value,is_anomaly'"),
        });
    }

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut labels = Vec::new();
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
        let mut cols = row.split(',');
        let (Some(ts), Some(val), Some(flag), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(bad(format!("expected 3 columns, got '{row}'")));
        };
        let timestamp: i64 = ts
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid timestamp '{ts}'")))?;
        let value: f64 = val
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid value '{val}'")))?;
        if !value.is_finite() {
            return Err(bad(format!("non-finite value '{val}'")));
        }
        let label = match flag.trim() {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("invalid is_anomaly '{other}'"))),
        };
        timestamps.push(timestamp);
        values.push(value);
        labels.push(label);
    }

    assemble_series(
        RawSeries {
            id,
            file,
            timestamps,
            values,
            labels,
        },
        YAHOO_GRANULARITY_S,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(dir: &Path, name: &str, body: &str) {
        let mut f = fs::File::create(dir.join(name)).unwrap();
        write!(f, "{body}").unwrap();
    }

    #[test]
    fn loads_index_timestamped_file() {
        let dir = tempfile::tempdir().unwrap();
        write_csv(
            dir.path(),
            "real_1.csv",
            "timestamp,value,is_anomaly\n1,5.0,0\n2,6.0,1\n",
        );
        let series = load_yahoo_a1(dir.path()).unwrap();
        assert_eq!(series.len(), 1);
        let s = &series[0];
        assert_eq!(s.id(), "real_1");
        assert_eq!(s.len(), 2);
        assert_eq!(s.granularity_s(), 3600);
        assert_eq!(s.labels(), &[false, true]);
        assert_eq!(s.points()[0].value, 5.0);
    }

    #[test]
    fn malformed_value_names_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        write_csv(
            dir.path(),
            "real_2.csv",
            "timestamp,value,is_anomaly\n1,abc,0\n2,6.0,0\n",
        );
        let err = load_yahoo_a1(dir.path()).unwrap_err();
        match err {
            Error::ParseRow { file, line, .. } => {
                assert!(file.ends_with("real_2.csv"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_monotone_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_csv(
            dir.path(),
            "real_3.csv",
            "timestamp,value,is_anomaly\n2,5.0,0\n1,6.0,0\n",
        );
        assert!(load_yahoo_a1(dir.path()).is_err());
    }

    #[test]
    fn output_sorted_by_id_and_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        write_csv(
            dir.path(),
            "real_2.csv",
            "timestamp,value,is_anomaly\n1,1.0,0\n2,2.0,0\n",
        );
        write_csv(
            dir.path(),
            "real_1.csv",
            "timestamp,value,is_anomaly\n1,1.0,0\n2,2.0,0\n",
        );
        let a = load_yahoo_a1(dir.path()).unwrap();
        let b = load_yahoo_a1(dir.path()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].id(), "real_1");
        assert_eq!(a[1].id(), "real_2");
    }
}
