//! `fhecore-sim` front end.
//!
//! ```text
//! fhecore-sim <command> [--config <path>] [--seed <u64>] [--out <path>] [key=value ...]
//! ```
//!
//! Exit status: 0 on success, 1 on a configuration or I/O error, 2 when a
//! built-in correctness check fails.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};

use clap::Parser;

pub use commands::run;
pub use config::{
    load_workload, parse_override, BaseconvParams, Command, CommandConfig, CostParams,
    ExecutorKind, NttParams, RunConfig, SelftestParams, SimulateParams, DEFAULT_SEED,
};
pub use report::Report;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Assertion(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fhecore-sim",
    version,
    about = "Modular matmul unit simulator and cost model"
)]
pub struct Args {
    /// JSON config file; its `command` key may replace the positional command.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every randomized input (ChaCha8).
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report path (default: fhecore-<command>.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Command (ntt, baseconv, simulate, cost, selftest) followed by key=value overrides.
    #[arg(value_name = "COMMAND|KEY=VALUE")]
    pub rest: Vec<String>,
}

/// Turns parsed arguments into a validated config.
pub fn parse_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut rest = args.rest.as_slice();
    let mut command = None;
    if let Some(first) = rest.first().filter(|s| !s.contains('=')) {
        command = Some(
            <Command as clap::ValueEnum>::from_str(first, false)
                .map_err(|_| CliError::Validation(format!("unknown command '{first}'")))?,
        );
        rest = &rest[1..];
    }
    let overrides = rest
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    let (text, base) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read config {}: {e}", path.display()))
            })?;
            (
                Some(text),
                path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            )
        }
        None => (None, PathBuf::from(".")),
    };
    RunConfig::build(
        command,
        text.as_deref(),
        &base,
        &overrides,
        args.seed,
        args.out.clone(),
    )
}

/// Default JSON report location for a command.
pub fn default_out(command: Command) -> PathBuf {
    PathBuf::from(format!("fhecore-{}.json", command.name()))
}

/// Runs the command, prints the table and writes the JSON report.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let report = run(cfg)?;
    print!("{}", report.to_table());
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| default_out(cfg.command.command()));
    std::fs::write(&out, report.to_json())
        .map_err(|e| CliError::Validation(format!("cannot write report {}: {e}", out.display())))?;
    println!("report: {}", out.display());
    if !report.passed() {
        return Err(CliError::Assertion(format!(
            "failed checks: {}",
            report.failures().join(", ")
        )));
    }
    Ok(report)
}

pub fn main_entry() -> i32 {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match parse_config(&args).and_then(|cfg| execute(&cfg)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("fhecore-sim: {e}");
            e.exit_code()
        }
    }
}
