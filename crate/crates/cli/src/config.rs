//! Flat key–value experiment configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment. List values are
//! comma-separated. Unknown keys are errors so typos cannot silently fall
//! back to defaults.
//!
//! ```text
//! problems = BK1, IM1, MHHM2
//! cases = case_i, case_ii
//! solvers = pgm, fgm
//! n_starts = 100
//! seed = 42
//! epsilon = 1e-4
//! max_outer = 1000
//! l_init = 1
//! max_inner = 60
//! descent_slack = 1e-10
//! output_dir = out
//! fixed_model = false
//! jobs = 0
//! ```

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use holder_condg::bench::{CaseKind, ExperimentConfig, BENCHMARK_PROBLEMS};
use holder_condg::solvers::Method;

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, got `{raw}`", lineno + 1);
        };
        let key = key.trim();
        let value = value.trim();
        let ctx = || format!("line {}: key `{key}`", lineno + 1);
        match key {
            "problems" => {
                cfg.problems = if value.eq_ignore_ascii_case("all") {
                    BENCHMARK_PROBLEMS.iter().map(|s| s.to_string()).collect()
                } else {
                    split_list(value)
                };
            }
            "cases" => {
                cfg.cases = split_list(value)
                    .iter()
                    .map(|v| parse_case(v))
                    .collect::<Result<_>>()
                    .with_context(ctx)?;
            }
            "solvers" => {
                cfg.solvers = split_list(value)
                    .iter()
                    .map(|v| parse_solver(v))
                    .collect::<Result<_>>()
                    .with_context(ctx)?;
            }
            "n_starts" => cfg.n_starts = value.parse().with_context(ctx)?,
            "seed" => cfg.seed = value.parse().with_context(ctx)?,
            "epsilon" => cfg.solver_cfg.epsilon = value.parse().with_context(ctx)?,
            "max_outer" => cfg.solver_cfg.max_outer = value.parse().with_context(ctx)?,
            "l_init" => cfg.solver_cfg.l_init = value.parse().with_context(ctx)?,
            "max_inner" => cfg.solver_cfg.max_inner = value.parse().with_context(ctx)?,
            "descent_slack" => cfg.solver_cfg.descent_slack = value.parse().with_context(ctx)?,
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "fixed_model" => cfg.fixed_model = parse_bool(value).with_context(ctx)?,
            "jobs" => cfg.jobs = value.parse().with_context(ctx)?,
            other => bail!("line {}: unknown key `{other}`", lineno + 1),
        }
    }
    Ok(cfg)
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_case(value: &str) -> Result<CaseKind> {
    match value.to_ascii_lowercase().as_str() {
        "case_i" | "i" => Ok(CaseKind::CaseI),
        "case_ii" | "ii" => Ok(CaseKind::CaseII),
        other => bail!("unknown case `{other}` (expected case_i or case_ii)"),
    }
}

fn parse_solver(value: &str) -> Result<Method> {
    match value.to_ascii_lowercase().as_str() {
        "pgm" => Ok(Method::Pgm),
        "fgm" => Ok(Method::Fgm),
        other => bail!("unknown solver `{other}` (expected pgm or fgm)"),
    }
}

fn parse_bool(value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => bail!("expected a boolean, got `{other}`"),
    }
}
