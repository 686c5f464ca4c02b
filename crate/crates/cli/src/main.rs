//! `driftbench`: config-driven experiment runs for anomaly-detector
//! maintenance benchmarks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use driftbench_cli::config::ExperimentConfig;
use driftbench_cli::{compare, runner};

#[derive(Parser)]
#[command(name = "driftbench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config file; exit 0 iff it parses and passes invariants.
    Validate { config: PathBuf },
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Worker threads for per-series runs (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare two summary reports with paired Wilcoxon tests.
    Compare {
        summary_a: PathBuf,
        summary_b: PathBuf,
        #[arg(long, default_value_t = 0.10)]
        alpha: f64,
        /// Scenario to take from the first report (required if several).
        #[arg(long)]
        scenario_a: Option<String>,
        /// Scenario to take from the second report (required if several).
        #[arg(long)]
        scenario_b: Option<String>,
    },
    /// Generate a synthetic series and write it as Yahoo-format CSV.
    Synth {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DRIFTBENCH_LOG")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(_) => {
                println!("ok");
                0
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Command::Run {
            config,
            jobs,
            output,
        } => match runner::cmd_run(&config, jobs, output.as_deref()) {
            Ok(outcome) => {
                println!(
                    "wrote {} ({} series{})",
                    outcome.output_dir.display(),
                    outcome.series_run,
                    if outcome.failed_series > 0 {
                        format!(", {} failed", outcome.failed_series)
                    } else {
                        String::new()
                    }
                );
                outcome.exit_code()
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Command::Compare {
            summary_a,
            summary_b,
            alpha,
            scenario_a,
            scenario_b,
        } => match compare::cmd_compare(
            &summary_a,
            &summary_b,
            alpha,
            scenario_a.as_deref(),
            scenario_b.as_deref(),
        ) {
            Ok(output) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&output).expect("comparison serializes")
                );
                0
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Command::Synth { spec, out } => match runner::cmd_synth(&spec, &out) {
            Ok(()) => {
                println!("wrote {}", out.display());
                0
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
