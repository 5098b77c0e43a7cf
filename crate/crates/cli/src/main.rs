//! Command-line runner for the experiment suites.
//!
//! `mmlab list` prints the available suites; `mmlab <suite>` runs one and
//! writes its report as CSV or JSON to stdout or `--out`. Exit codes: 0 on
//! success, 2 on config or usage errors, 3 on runtime failures. The seed
//! resolution order is `--seed`, then the MMLAB_SEED env var, then the
//! config file, then 0.

use clap::Parser;
use mmlab_core::harness::{emit_report, Config, ReportFormat, SUITES};
use mmlab_core::{run_suite, MmError};
use std::io::{self, ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mmlab",
    about = "Deterministic experiment suites for ellipsoid and Gaussian measures",
    after_help = "Run `mmlab list` to see the available suites."
)]
struct Cli {
    /// Suite to run, or `list` to print the available suites.
    suite: String,

    /// Key-value config file; keys the suite does not know are errors.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides MMLAB_SEED and the config file.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Report destination; omit to write to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_name = "csv|json", default_value = "csv")]
    format: String,

    /// Worker threads; 0 picks the machine default. Never changes output.
    #[arg(long, value_name = "K")]
    workers: Option<usize>,
}

/// Write to stdout, treating a closed pipe as normal termination so
/// `mmlab <suite> | head` exits quietly instead of panicking.
fn write_stdout(text: &str) -> mmlab_core::Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(err) if err.kind() == ErrorKind::BrokenPipe => Ok(()),
        Err(err) => Err(MmError::Runtime(format!("stdout write failed: {err}"))),
    }
}

fn run(cli: &Cli) -> mmlab_core::Result<()> {
    let format: ReportFormat = cli.format.parse()?;

    let mut config = match &cli.config {
        Some(path) => Config::from_path(path)?,
        None => Config::new(),
    };
    if let Ok(raw) = std::env::var("MMLAB_SEED") {
        let seed: u64 = raw
            .trim()
            .parse()
            .map_err(|_| MmError::Config(format!("MMLAB_SEED is not a u64: {raw:?}")))?;
        config.set("seed", seed.to_string());
    }
    if let Some(seed) = cli.seed {
        config.set("seed", seed.to_string());
    }
    if let Some(workers) = cli.workers {
        config.set("workers", workers.to_string());
    }

    let report = run_suite(&cli.suite, &config)?;
    eprintln!(
        "{}: {} rows in {:.3}s",
        report.suite,
        report.rows.len(),
        report.wall_clock.as_secs_f64()
    );

    match &cli.out {
        Some(path) => emit_report(&report, format, path),
        None => {
            let text = match format {
                ReportFormat::Csv => report.to_csv_string(),
                ReportFormat::Json => report.to_json_string()?,
            };
            write_stdout(&text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.suite == "list" {
        let mut listing = String::new();
        for (name, description) in SUITES {
            listing.push_str(&format!("{name:18} {description}\n"));
        }
        return match write_stdout(&listing) {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => {
                eprintln!("error: {err}");
                ExitCode::from(3)
            }
        };
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                MmError::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
