//! Benchmark CLI for the multiobjective conditional gradient solvers.
//!
//! Subcommands:
//! - `run <config>`: execute the seeded multi-start protocol and write
//!   `runs.jsonl`, `summary.csv`, `metrics.csv`, `profiles.csv`;
//! - `report <runs.jsonl>`: recompute summary/metric/profile files from a
//!   stored run log;
//! - `check <runs.jsonl>`: replay the theory checks on stored traces.
//!
//! Exit codes: 0 success, 2 config error, 3 I/O or serialization error,
//! 4 at least one run aborted with an error status or a theory violation.

mod config;
mod files;

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use holder_condg::bench::{
    compute_metrics, run_experiment, summarize, CaseKind, ExperimentConfig, ExperimentOutput,
    RunRecord,
};
use holder_condg::models::NonsmoothModel;
use holder_condg::problems::construct_problem;
use holder_condg::solvers::{evaluate_f, Method, RunStatus};
use holder_condg::theory::{check_run, convex_rate_check};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_RUN_ERROR: u8 = 4;

/// Seed override honored between the config file and the `--seed` flag.
const SEED_ENV: &str = "HOLDER_CONDG_SEED";

#[derive(Parser)]
#[command(
    name = "holder-condg",
    version,
    about = "Multiobjective conditional gradient benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment protocol described by a config file.
    Run(RunArgs),
    /// Recompute summary, metrics and profiles from a stored runs.jsonl.
    Report(ReportArgs),
    /// Replay the theory checks on a stored runs.jsonl.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the flat key-value config file.
    config: PathBuf,
    /// Master seed override (beats HOLDER_CONDG_SEED and the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel worker cap (0 = runtime default).
    #[arg(long)]
    jobs: Option<usize>,
    /// Sample one Case ii model per problem instead of one per start.
    #[arg(long)]
    fixed_model: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored run log.
    runs: PathBuf,
    /// Output directory (defaults to the run log's directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Stored run log.
    runs: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Report(args) => cmd_report(args),
        Command::Check(args) => cmd_check(args),
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut cfg = match config::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Ok(env_seed) = std::env::var(SEED_ENV) {
        match env_seed.parse() {
            Ok(s) => cfg.seed = s,
            Err(_) => {
                eprintln!("error: {SEED_ENV}={env_seed} is not an integer seed");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs;
    }
    if args.fixed_model {
        cfg.fixed_model = true;
    }

    let output = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = files::emit_outputs(&cfg.output_dir, &output) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_IO);
    }
    print_summary(&output);

    let errored: Vec<&RunRecord> = output
        .runs
        .iter()
        .filter(|r| r.result.status == RunStatus::Error)
        .collect();
    let violated: Vec<&RunRecord> = output
        .runs
        .iter()
        .filter(|r| !r.theory.clean() || r.convex_rate.as_ref().is_some_and(|c| !c.clean()))
        .collect();
    if !errored.is_empty() || !violated.is_empty() {
        for r in errored.iter().take(5) {
            eprintln!(
                "run error: {} {} {} start {}: {}",
                r.problem,
                r.case.tag(),
                r.solver.tag(),
                r.start_index,
                r.result.error_detail.as_deref().unwrap_or("unknown")
            );
        }
        for r in violated.iter().take(5) {
            eprintln!(
                "theory violation: {} {} {} start {}",
                r.problem,
                r.case.tag(),
                r.solver.tag(),
                r.start_index
            );
        }
        eprintln!(
            "{} run errors, {} runs with theory violations",
            errored.len(),
            violated.len()
        );
        return ExitCode::from(EXIT_RUN_ERROR);
    }
    ExitCode::SUCCESS
}

fn print_summary(output: &ExperimentOutput) {
    println!(
        "{:<10} {:<8} {:<6} {:>11} {:>12} {:>12} {:>8}",
        "problem", "case", "solver", "med_iter", "med_feval", "med_cpu_s", "failed"
    );
    for row in &output.summary {
        println!(
            "{:<10} {:<8} {:<6} {:>11} {:>12} {:>12.5} {:>8}",
            row.problem,
            row.case.tag(),
            row.solver.tag(),
            row.median_iter,
            row.median_feval,
            row.median_cpu_s,
            row.n_failed
        );
    }
}

/// Reconstructs the ordering information `summarize`/`compute_metrics` need
/// from the stored records themselves.
fn config_echo_from_runs(runs: &[RunRecord]) -> ExperimentConfig {
    let mut problems: Vec<String> = Vec::new();
    let mut cases: Vec<CaseKind> = Vec::new();
    let mut solvers: Vec<Method> = Vec::new();
    let mut seen_p: HashSet<String> = HashSet::new();
    for r in runs {
        if seen_p.insert(r.problem.clone()) {
            problems.push(r.problem.clone());
        }
        if !cases.contains(&r.case) {
            cases.push(r.case);
        }
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver);
        }
    }
    let n_starts = runs.iter().map(|r| r.start_index + 1).max().unwrap_or(1);
    let solver_cfg = runs.first().map(|r| r.solver_cfg).unwrap_or_default();
    let seed = runs.first().map(|r| r.master_seed).unwrap_or(0);
    ExperimentConfig {
        problems,
        cases,
        solvers,
        n_starts,
        seed,
        solver_cfg,
        ..ExperimentConfig::default()
    }
}

fn cmd_report(args: ReportArgs) -> ExitCode {
    let runs = match files::read_runs_jsonl(&args.runs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_IO);
        }
    };
    if runs.is_empty() {
        eprintln!("error: {} holds no runs", args.runs.display());
        return ExitCode::from(EXIT_CONFIG);
    }
    let cfg = config_echo_from_runs(&runs);
    let summary = summarize(&cfg, &runs);
    let (metrics, profiles) = compute_metrics(&cfg, &runs);
    let output = ExperimentOutput {
        runs,
        summary,
        metrics,
        profiles,
    };
    let dir = args.out.unwrap_or_else(|| {
        args.runs
            .parent()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    if let Err(e) = files::emit_outputs(&dir, &output) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_IO);
    }
    print_summary(&output);
    ExitCode::SUCCESS
}

fn cmd_check(args: CheckArgs) -> ExitCode {
    let runs = match files::read_runs_jsonl(&args.runs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_IO);
        }
    };
    match replay_checks(&runs) {
        Ok((checked, violations)) => {
            println!("replayed theory checks on {checked} runs: {violations} with violations");
            if violations == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RUN_ERROR)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn replay_checks(runs: &[RunRecord]) -> Result<(usize, usize)> {
    let mut violations = 0usize;
    for r in runs {
        let problem = construct_problem(&r.problem)
            .with_context(|| format!("rebuilding problem {}", r.problem))?;
        if r.result.status == RunStatus::Error {
            violations += 1;
            println!(
                "{} {} {} start {}: stored status=error ({})",
                r.problem,
                r.case.tag(),
                r.solver.tag(),
                r.start_index,
                r.result.error_detail.as_deref().unwrap_or("unknown")
            );
            continue;
        }
        let report = check_run(&problem, &r.result, &r.solver_cfg);
        let mut clean = report.clean();
        if r.problem == "SHARED-MIN" {
            let model = match &r.model {
                Some(m) => NonsmoothModel::Support(m.clone()),
                None => NonsmoothModel::indicator(problem.domain.clone()),
            };
            let x_star = vec![0.0; problem.n()];
            if let Ok(f_star) = evaluate_f(&problem, &model, &x_star) {
                let convex = convex_rate_check(&r.result, &f_star, &problem, &r.solver_cfg);
                clean &= convex.clean();
            }
        }
        if !clean {
            violations += 1;
            println!(
                "{} {} {} start {}: {:?}",
                r.problem,
                r.case.tag(),
                r.solver.tag(),
                r.start_index,
                report
            );
        }
    }
    Ok((runs.len(), violations))
}
