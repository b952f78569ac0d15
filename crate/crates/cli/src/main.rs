//! `fracthermistor`: batch front end for the fractional nonlocal thermistor
//! solver.
//!
//! ```text
//! fracthermistor solve    run.json   # the config's mode (local, global, gronwall, ...)
//! fracthermistor converge run.json   # grid-refinement study
//! fracthermistor validate run.json   # sampled hypothesis audit
//! ```
//!
//! Exit status: 0 on success, 2 on escape or a violated hypothesis, 1 on
//! solver failure or any configuration or I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod modes;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{Mode, RunConfig, OUTPUT_DIR_ENV};
use modes::Exit;

#[derive(Debug, Parser)]
#[command(name = "fracthermistor", version, about)]
struct Cli {
    /// Suppress progress lines on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the mode named in the config.
    Solve { config: PathBuf },
    /// Run a convergence study, whatever the config's mode.
    Converge { config: PathBuf },
    /// Audit the hypotheses on the conductivity, whatever the config's mode.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Exit::Failure as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<Exit> {
    let started = Instant::now();
    let (path, forced) = match &cli.command {
        Command::Solve { config } => (config, None),
        Command::Converge { config } => (config, Some(Mode::Converge)),
        Command::Validate { config } => (config, Some(Mode::Validate)),
    };
    let quiet = cli.quiet;
    let progress = |line: &str| {
        if !quiet {
            eprintln!("[fracthermistor] {line}");
        }
    };

    let mut raw = RunConfig::from_path(path)?;
    if let Some(mode) = forced {
        raw.mode = mode;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let override_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let cfg = raw.load(&base, override_dir.as_deref())?;
    progress(&format!("mode {}", cfg.mode.name()));

    let mut outcome = modes::run(&cfg, &progress)?;
    let out = &cfg.outputs;
    if let (Some(path), Some(rows)) = (&out.trajectory, outcome.trajectory.take()) {
        report::write_csv(path, &["t", "u", "I", "S", "residual"], rows)?;
        progress(&format!("wrote {}", path.display()));
    }
    if let (Some(path), Some(rows)) = (&out.table, outcome.table.take()) {
        report::write_csv(path, &["N", "error", "order"], rows)?;
        progress(&format!("wrote {}", path.display()));
    }
    if let (Some(path), Some(rows)) = (&out.majorant, outcome.majorant.take()) {
        report::write_csv(path, &["t", "v", "w", "majorant"], rows)?;
        progress(&format!("wrote {}", path.display()));
    }
    outcome.report.timings_ms.total = started.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &out.report {
        report::write_report(path, &outcome.report)?;
        progress(&format!("wrote {}", path.display()));
    }
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}: {}", outcome.report.mode, outcome.report.verdict);
    Ok(outcome.exit)
}
