//! Output files: `runs.jsonl`, `summary.csv`, `metrics.csv`, `profiles.csv`.
//!
//! Every file is written to a `.tmp` sibling first and renamed into place;
//! a failure removes the temporaries so no partial outputs survive.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use holder_condg::bench::{ExperimentOutput, MetricRow, ProfileRow, RunRecord, SummaryRow};

pub fn emit_outputs(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = (|| -> Result<()> {
        staged.push(write_staged(dir, "runs.jsonl", |w| {
            write_runs_jsonl(w, &out.runs)
        })?);
        staged.push(write_staged(dir, "summary.csv", |w| {
            write_summary_csv(w, &out.summary)
        })?);
        staged.push(write_staged(dir, "metrics.csv", |w| {
            write_metrics_csv(w, &out.metrics)
        })?);
        staged.push(write_staged(dir, "profiles.csv", |w| {
            write_profiles_csv(w, &out.profiles)
        })?);
        Ok(())
    })();
    match result {
        Ok(()) => {
            for (tmp, final_path) in &staged {
                fs::rename(tmp, final_path)
                    .with_context(|| format!("renaming {}", tmp.display()))?;
            }
            Ok(())
        }
        Err(e) => {
            for (tmp, _) in &staged {
                let _ = fs::remove_file(tmp);
            }
            Err(e)
        }
    }
}

fn write_staged(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<(PathBuf, PathBuf)> {
    let final_path = dir.join(name);
    let tmp = dir.join(format!("{name}.tmp"));
    let file = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    let mut writer = BufWriter::new(file);
    match write(&mut writer).and_then(|()| writer.flush().map_err(Into::into)) {
        Ok(()) => Ok((tmp, final_path)),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn write_runs_jsonl(w: &mut impl Write, runs: &[RunRecord]) -> Result<()> {
    for run in runs {
        let line = serde_json::to_string(run).context("serializing run record")?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_runs_jsonl(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader = BufReader::new(file);
    let mut runs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let run: RunRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        runs.push(run);
    }
    Ok(runs)
}

fn write_summary_csv(w: &mut impl Write, rows: &[SummaryRow]) -> Result<()> {
    writeln!(
        w,
        "problem,case,solver,median_iter,median_feval,median_cpu_s,n_failed"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.problem,
            r.case.tag(),
            r.solver.tag(),
            r.median_iter,
            r.median_feval,
            r.median_cpu_s,
            r.n_failed
        )?;
    }
    Ok(())
}

fn write_metrics_csv(w: &mut impl Write, rows: &[MetricRow]) -> Result<()> {
    writeln!(w, "problem,case,solver,purity,gamma,delta,n_points")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.problem,
            r.case.tag(),
            r.solver.tag(),
            r.purity,
            r.gamma.map(|v| v.to_string()).unwrap_or_default(),
            r.delta.map(|v| v.to_string()).unwrap_or_default(),
            r.n_points
        )?;
    }
    Ok(())
}

fn write_profiles_csv(w: &mut impl Write, rows: &[ProfileRow]) -> Result<()> {
    writeln!(w, "metric,solver,tau,rho")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.metric, r.solver.tag(), r.tau, r.rho)?;
    }
    Ok(())
}
