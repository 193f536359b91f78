use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stype_core::cli::{explain, parse_config, render, run_check, run_sweep, CheckConfig, CheckKind};
use stype_core::models::catalog;
use stype_core::Error;

#[derive(Parser)]
#[command(name = "stype", version, about = "Curvature-recursion and geodesic-symmetry checks for symplectic connections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured checks and write a report.
    Check { config: PathBuf },
    /// Run the configured checks and write max/median summaries.
    Sweep { config: PathBuf },
    /// List the model catalog and its parameters.
    Models,
    /// Describe what a check computes.
    Explain { check: String },
}

fn load(path: &PathBuf) -> Result<CheckConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn emit(config: &CheckConfig, body: &str) -> Result<(), Error> {
    match &config.output {
        Some(path) => std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("STYPE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("STYPE_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn run(path: &PathBuf, sweep: bool) -> Result<u8, Error> {
    configure_threads()?;
    let config = load(path)?;
    let report = if sweep { run_sweep(&config)? } else { run_check(&config)? };
    let json = if sweep { report.to_sweep_json() } else { report.to_json() };
    emit(&config, &render(&json)?)?;
    eprintln!(
        "{}: {} cells, {} failed, {} errors",
        if report.pass() { "PASS" } else { "FAIL" },
        report.cells.len(),
        report.failed(),
        report.errors()
    );
    Ok(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { config } => finish(run(&config, false)),
        Command::Sweep { config } => finish(run(&config, true)),
        Command::Models => {
            for (kind, doc) in catalog() {
                println!("{kind}\n    {doc}");
            }
            ExitCode::SUCCESS
        }
        Command::Explain { check } => match check.parse::<CheckKind>() {
            Ok(c) => {
                println!("{}", explain(c));
                ExitCode::SUCCESS
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}

fn finish(result: Result<u8, Error>) -> ExitCode {
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
