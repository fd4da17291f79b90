mod compute;
mod config;
mod error;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use compute::{ComputeArgs, Quantity};
use config::{ParamArgs, RunConfig};
use error::{CliError, Status};
use report::{render, Summary};

#[derive(Debug, Parser)]
#[command(name = "qkz", version, about = "Numerics for the qKZ equation with |q| = 1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites and emit a JSON-lines report.
    Verify {
        /// suite name or `all`
        suite: Option<String>,
        /// override every suite tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Evaluate one quantity and print it as JSON.
    Compute {
        #[arg(value_enum)]
        quantity: Quantity,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        extra: ComputeArgs,
    },
}

fn threads() -> Result<usize, CliError> {
    match std::env::var("QKZ_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(CliError::Usage(format!("QKZ_THREADS must be a positive integer, got {s:?}"))),
        },
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn verify(suite: Option<String>, tol: Option<f64>, out: Option<PathBuf>, params: &ParamArgs) -> Result<Status, CliError> {
    let cfg = RunConfig::resolve(params, tol, out)?;
    let requested = match suite {
        Some(s) => vec![s],
        None => cfg.suites.clone().unwrap_or_else(|| vec!["all".to_string()]),
    };
    let mut names: Vec<&'static str> = Vec::new();
    for r in &requested {
        let expanded = suites::expand(r).ok_or_else(|| {
            CliError::Usage(format!("unknown suite {r:?}; expected one of {} or all", suites::SUITES.join(", ")))
        })?;
        for name in expanded {
            if !names.contains(&name) {
                names.push(name);
            }
        }
    }

    let mut records = Vec::new();
    for name in &names {
        let start = Instant::now();
        let batch = suites::run(name, &cfg);
        eprintln!("{name}: {} checks in {:.2?}", batch.len(), start.elapsed());
        records.extend(batch);
    }
    let summary = Summary::of(names, &records);
    emit(&render(&records, &summary), cfg.output.as_ref())?;

    Ok(if summary.guard_failures > 0 {
        Status::GuardFailure
    } else if summary.failed > 0 {
        Status::CheckFailure
    } else {
        Status::Pass
    })
}

fn run(cli: Cli) -> Result<Status, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads()?)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    match cli.command {
        Command::Verify { suite, tol, out, params } => verify(suite, tol, out, &params),
        Command::Compute { quantity, out, params, extra } => {
            let cfg = RunConfig::resolve(&params, None, out)?;
            let doc = compute::compute(quantity, &extra, &cfg)?;
            let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
            text.push('\n');
            emit(&text, cfg.output.as_ref())?;
            Ok(Status::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { Status::Usage as u8 } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("qkz: {e}");
            ExitCode::from(e.status() as u8)
        }
    }
}
