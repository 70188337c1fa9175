#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spirallab::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("could not serialise the report: {0}")]
    Json(#[from] serde_json::Error),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SPIRALLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SPIRALLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("could not start {n} threads: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let start = Instant::now();
    let (name, outcome, report_path) = match &cli.command {
        Command::Covering(a) => ("covering", commands::covering(a, cli.seed)?, &a.out),
        Command::Koenigs(a) => ("koenigs", commands::koenigs_cmd(a, cli.seed)?, &a.report),
        Command::Flow(a) => ("flow", commands::flow_cmd(a)?, &a.out),
        Command::SpiralCheck(a) => ("spiral-check", commands::spiral_check(a)?, &a.out),
        Command::Extend(a) => ("extend", commands::extend(a, cli.seed)?, &a.out),
        Command::SharpBound(a) => ("sharp-bound", commands::sharp_bound(a)?, &a.out),
        Command::GenExtend(a) => ("gen-extend", commands::gen_extend(a, cli.seed)?, &a.out),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    log::info!("{name}: pass = {} in {elapsed:.1} ms", outcome.pass);
    for (path, text) in &outcome.csv {
        output::write_atomic(path, text)?;
    }
    let json = output::render(name, &outcome, elapsed)?;
    match report_path {
        Some(path) => output::write_atomic(path, &json)?,
        None => print!("{json}"),
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("spirallab: {e}");
            ExitCode::from(2)
        }
    }
}
