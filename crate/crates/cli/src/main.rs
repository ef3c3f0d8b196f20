//! `nehari-cc <command> --config <path> [--out <dir>] [--seed <u64>]`
//!
//! Exit status: 0 success, 2 config error, 3 violated hypothesis,
//! 4 nonconvergence (best iterate dumped), 5 unwritable output directory.

mod commands;
mod config;
mod error;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutDir;
use crate::report::Report;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Classify fibers and locate their critical points.
    FiberAnalyze,
    /// Minimize the nonlinear Rayleigh quotient to find the extremal value.
    LambdaStar,
    /// Compute both positive branches on the lambda grid and continue past
    /// the extremal value.
    SolveBranches,
    /// Compare the plus branch with its Lane-Emden limit as lambda -> 0.
    Asymptotics,
    /// Cross-check the solvers against the independent oracles.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::FiberAnalyze => "fiber-analyze",
            Command::LambdaStar => "lambda-star",
            Command::SolveBranches => "solve-branches",
            Command::Asymptotics => "asymptotics",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nehari-cc", version, about = "Nehari-manifold solvers for concave-convex p-Laplacian problems")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every random choice; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nehari-cc: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out_path = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    cfg.out = Some(out_path.clone());
    let out = OutDir::prepare(&out_path)?;
    let echo = serde_json::to_string_pretty(&cfg).expect("config serializes");

    let result = match args.command {
        Command::FiberAnalyze => commands::fiber_analyze(&cfg),
        Command::LambdaStar => commands::lambda_star(&cfg),
        Command::SolveBranches => commands::solve_branches_cmd(&cfg),
        Command::Asymptotics => commands::asymptotics(&cfg),
        Command::Validate => commands::validate(&cfg),
    };
    match result {
        Ok(Outcome { files, report }) => {
            for (name, bytes) in &files {
                out.write(name, bytes)?;
            }
            out.write("report.txt", report.finish(&echo).as_bytes())
        }
        Err(err) => {
            let mut report = Report::new(args.command.name());
            report.section("error");
            report.text_value("exit_code", err.exit_code());
            report.line(err.message());
            if let CliError::NonConvergence { best, .. } = &err {
                let rows: Vec<String> = best.iter().enumerate().map(|(i, v)| format!("{i},{v:e}\n")).collect();
                let csv = format!("index,value\n{}", rows.concat());
                out.write("best_iterate.csv", csv.as_bytes())?;
                report.line("best iterate written to best_iterate.csv");
            }
            // The report is best effort here; the original error decides the
            // exit status.
            let _ = out.write("report.txt", report.finish(&echo).as_bytes());
            Err(err)
        }
    }
}
