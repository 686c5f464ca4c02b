//! Library half of the `driftbench` command-line tool: experiment config,
//! run orchestration, report comparison, and the run manifest.

pub mod compare;
pub mod config;
pub mod manifest;
pub mod runner;

/// Command failures mapped to process exit codes: config errors exit 1,
/// data errors exit 2 (partial series failures exit 3 on success paths).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
