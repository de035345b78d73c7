//! End-to-end tests for the benchmark CLI: exit codes, file schemas,
//! determinism, seed precedence, and the report/check round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holder-condg"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("exp.cfg");
    fs::write(&path, body).unwrap();
    path
}

fn small_config(out_dir: &Path) -> String {
    format!(
        "problems = BK1, MAN3\n\
         cases = case_i, case_ii\n\
         solvers = pgm, fgm\n\
         n_starts = 4\n\
         seed = 42\n\
         jobs = 1\n\
         output_dir = {}\n",
        out_dir.display()
    )
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn CLI");
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Strips the wall-time field from a runs.jsonl line so timing does not
/// participate in determinism comparisons.
fn strip_timing(line: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
    if let Some(result) = v.get_mut("result") {
        result.as_object_mut().unwrap().remove("wall_time");
    }
    v
}

#[test]
fn run_writes_all_outputs_with_fixed_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &small_config(&out_dir));
    run_ok(bin().arg("run").arg(&cfg));

    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(
        summary.starts_with("problem,case,solver,median_iter,median_feval,median_cpu_s,n_failed\n")
    );
    assert_eq!(summary.lines().count(), 1 + 8); // 2 problems × 2 cases × 2 solvers

    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("problem,case,solver,purity,gamma,delta,n_points\n"));

    let profiles = fs::read_to_string(out_dir.join("profiles.csv")).unwrap();
    assert!(profiles.starts_with("metric,solver,tau,rho\n"));
    // Rows sorted by tau within each (metric, solver) group.
    let mut last: Option<(String, String, f64)> = None;
    for line in profiles.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let key = (cols[0].to_string(), cols[1].to_string());
        let tau: f64 = cols[2].parse().unwrap();
        if let Some((m, s, t)) = &last {
            if *m == key.0 && *s == key.1 {
                assert!(tau >= *t, "profiles not sorted by tau");
            }
        }
        last = Some((key.0, key.1, tau));
    }

    let runs = fs::read_to_string(out_dir.join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 32); // 2 problems × 2 cases × 2 solvers × 4 starts
    let first: serde_json::Value = serde_json::from_str(runs.lines().next().unwrap()).unwrap();
    for key in [
        "problem",
        "case",
        "solver",
        "start_index",
        "x0",
        "result",
        "theory",
    ] {
        assert!(first.get(key).is_some(), "runs.jsonl missing {key}");
    }
    // No stray temp files.
    assert!(!out_dir.join("runs.jsonl.tmp").exists());
}

#[test]
fn identical_configs_reproduce_outputs_except_timing() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), &small_config(&out_a));
    run_ok(bin().arg("run").arg(&cfg));
    run_ok(bin().arg("run").arg(&cfg).arg("--out").arg(&out_b));

    // Non-timing columns of summary.csv are identical.
    let take_cols = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                format!(
                    "{},{},{},{},{},{}",
                    cols[0], cols[1], cols[2], cols[3], cols[4], cols[6]
                )
            })
            .collect()
    };
    let a = fs::read_to_string(out_a.join("summary.csv")).unwrap();
    let b = fs::read_to_string(out_b.join("summary.csv")).unwrap();
    assert_eq!(take_cols(&a), take_cols(&b));

    // metrics.csv and profiles.csv carry no timing at all: bitwise equal.
    assert_eq!(
        fs::read(out_a.join("metrics.csv")).unwrap(),
        fs::read(out_b.join("metrics.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out_a.join("profiles.csv")).unwrap(),
        fs::read(out_b.join("profiles.csv")).unwrap()
    );

    // runs.jsonl identical after stripping wall time.
    let runs_a = fs::read_to_string(out_a.join("runs.jsonl")).unwrap();
    let runs_b = fs::read_to_string(out_b.join("runs.jsonl")).unwrap();
    for (la, lb) in runs_a.lines().zip(runs_b.lines()) {
        assert_eq!(strip_timing(la), strip_timing(lb));
    }
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_key = write_config(tmp.path(), "problems = BK1\nbogus_key = 3\n");
    let out = bin().arg("run").arg(&bad_key).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let bad_problem = write_config(tmp.path(), "problems = NOPE\nn_starts = 1\n");
    let out = bin().arg("run").arg(&bad_problem).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let missing = tmp.path().join("does-not-exist.cfg");
    let out = bin().arg("run").arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_dir_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "a plain file").unwrap();
    // output_dir points through a regular file: directory creation fails.
    let out_dir = blocker.join("out");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "problems = BK1\ncases = case_i\nsolvers = pgm\nn_starts = 1\nseed = 1\njobs = 1\noutput_dir = {}\n",
            out_dir.display()
        ),
    );
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn seed_precedence_flag_beats_env_beats_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "problems = BK1\ncases = case_i\nsolvers = pgm\nn_starts = 1\nseed = 1\njobs = 1\noutput_dir = {}\n",
            out_dir.display()
        ),
    );
    let seed_of = |dir: &Path| -> u64 {
        let runs = fs::read_to_string(dir.join("runs.jsonl")).unwrap();
        let v: serde_json::Value = serde_json::from_str(runs.lines().next().unwrap()).unwrap();
        v["master_seed"].as_u64().unwrap()
    };

    run_ok(bin().arg("run").arg(&cfg));
    assert_eq!(seed_of(&out_dir), 1);

    run_ok(bin().arg("run").arg(&cfg).env("HOLDER_CONDG_SEED", "7"));
    assert_eq!(seed_of(&out_dir), 7);

    run_ok(
        bin()
            .arg("run")
            .arg(&cfg)
            .arg("--seed")
            .arg("9")
            .env("HOLDER_CONDG_SEED", "7"),
    );
    assert_eq!(seed_of(&out_dir), 9);

    let out = bin()
        .arg("run")
        .arg(&cfg)
        .env("HOLDER_CONDG_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_regenerates_identical_non_timing_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let report_dir = tmp.path().join("report");
    let cfg = write_config(tmp.path(), &small_config(&out_dir));
    run_ok(bin().arg("run").arg(&cfg));
    run_ok(
        bin()
            .arg("report")
            .arg(out_dir.join("runs.jsonl"))
            .arg("--out")
            .arg(&report_dir),
    );
    assert_eq!(
        fs::read(out_dir.join("metrics.csv")).unwrap(),
        fs::read(report_dir.join("metrics.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out_dir.join("profiles.csv")).unwrap(),
        fs::read(report_dir.join("profiles.csv")).unwrap()
    );
}

#[test]
fn check_replays_clean_log_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &small_config(&out_dir));
    run_ok(bin().arg("run").arg(&cfg));
    let out = run_ok(bin().arg("check").arg(out_dir.join("runs.jsonl")));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 with violations"), "stdout: {stdout}");
}

#[test]
fn failed_runs_appear_at_cap_with_failed_status() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    // A tiny cap forces Failed runs on JOS1.
    let cfg = write_config(
        tmp.path(),
        &format!(
            "problems = JOS1\ncases = case_i\nsolvers = pgm\nn_starts = 2\nseed = 3\nmax_outer = 4\njobs = 1\noutput_dir = {}\n",
            out_dir.display()
        ),
    );
    run_ok(bin().arg("run").arg(&cfg));
    let runs = fs::read_to_string(out_dir.join("runs.jsonl")).unwrap();
    for line in runs.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["result"]["status"], "Failed");
        assert_eq!(v["result"]["counters"]["iter"], 4);
    }
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    assert!(row.ends_with(",2"), "n_failed column: {row}");
}
