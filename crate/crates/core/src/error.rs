//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by series handling, ingestion, detection, drift
/// monitoring, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short to split (length {len}, need at least 4)")]
    SeriesTooShortToSplit { len: usize },

    #[error("empty test range")]
    EmptyTestRange,

    #[error("batch length must be at least 2 (got {got})")]
    BatchLenTooSmall { got: usize },

    #[error("no clean data: all points in range are labeled anomalous")]
    NoCleanData,

    #[error("invalid series '{id}': {reason}")]
    InvalidSeries { id: String, reason: String },

    #[error("{file}:{line}: {reason}")]
    ParseRow {
        file: String,
        line: usize,
        reason: String,
    },

    #[error("label timestamp {timestamp} not present in series '{series}'")]
    LabelTimestampNotFound { series: String, timestamp: i64 },

    #[error("series '{id}' has too many missing timestamps ({missing} of {len}, cap 5%)")]
    TooManyGaps {
        id: String,
        missing: usize,
        len: usize,
    },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("window too short: need at least {needed} points, got {got}")]
    WindowTooShort { needed: usize, got: usize },

    #[error("degenerate window in {context}: zero variance")]
    DegenerateWindow { context: String },

    #[error("zero-norm feature vector")]
    ZeroNormVector,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("control chart signaled drift; reset before further updates")]
    DriftNotReset,

    #[error("batch too short for {detector}: need at least {min} points, got {got}")]
    BatchTooShort {
        detector: &'static str,
        min: usize,
        got: usize,
    },

    #[error("sliding window of {window} exceeds available history ({available})")]
    WindowExceedsHistory { window: usize, available: usize },

    #[error("missing drift signal for batch {batch_index} in informed mode")]
    MissingDriftSignal { batch_index: usize },

    #[error("insufficient pairs: {n} non-zero differences, need at least 5")]
    InsufficientPairs { n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series run failed for '{series}' at batch {batch}: {source}")]
    SeriesRun {
        series: String,
        batch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{file}: {source}")]
    Json {
        file: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
