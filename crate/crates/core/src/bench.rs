//! The multi-start benchmark harness: seeded uniform starts, paired Case ii
//! model sampling, both solvers, median summaries, Pareto metrics and
//! performance-profile data.
//!
//! Seeding is hierarchical and fully deterministic: a master seed combines
//! with the problem name, case tag, purpose ("x0" / "model") and start index
//! through an FNV-1a hash into one substream seed per draw. Both solvers
//! therefore face identical starts and identical Case ii models, making the
//! per-problem medians a paired comparison. Runs are independent and may
//! execute in parallel; outputs are sorted by (problem, case, solver, start)
//! so aggregation is order-independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{performance_profile, purity, spread_delta, spread_gamma, FrontApproximation};
use crate::models::{sample_support_model, ModelError, NonsmoothModel};
use crate::problems::{construct_problem, ProblemError, ProblemInstance};
use crate::solvers::{evaluate_f, run_fgm, run_pgm, Method, RunResult, RunStatus, SolverConfig};
use crate::theory::{check_run, convex_rate_check, ConvexRateReport, TheoryReport};

/// The fourteen benchmark rows (excludes the synthetic SHARED-MIN problem).
pub const BENCHMARK_PROBLEMS: [&str; 14] = [
    "BK1", "IKK1", "IM1", "JOS1", "Lov1", "MAN1", "MAN2", "MAN3", "MGH33", "MHHM2", "SP1", "Toi8",
    "VU1", "VU2",
];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    CaseI,
    CaseII,
}

impl CaseKind {
    pub fn tag(self) -> &'static str {
        match self {
            CaseKind::CaseI => "case_i",
            CaseKind::CaseII => "case_ii",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problems: Vec<String>,
    pub cases: Vec<CaseKind>,
    pub solvers: Vec<Method>,
    pub n_starts: usize,
    pub seed: u64,
    pub solver_cfg: SolverConfig,
    pub output_dir: std::path::PathBuf,
    /// Sample one Case ii model per problem instead of one per start.
    pub fixed_model: bool,
    /// Parallel worker cap; 0 means "let the runtime decide".
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problems: BENCHMARK_PROBLEMS.iter().map(|s| s.to_string()).collect(),
            cases: vec![CaseKind::CaseI],
            solvers: vec![Method::Pgm, Method::Fgm],
            n_starts: 100,
            seed: 42,
            solver_cfg: SolverConfig::default(),
            output_dir: std::path::PathBuf::from("out"),
            fixed_model: false,
            jobs: 0,
        }
    }
}

/// One solver execution with everything needed to reproduce and audit it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub case: CaseKind,
    pub solver: Method,
    pub start_index: usize,
    pub master_seed: u64,
    pub solver_cfg: SolverConfig,
    pub x0: Vec<f64>,
    /// Case ii model dump for reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<crate::models::SupportFunctionModel>,
    pub result: RunResult,
    pub theory: TheoryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convex_rate: Option<ConvexRateReport>,
}

/// Median row in the style of the benchmark table; medians use the standard
/// midpoint rule, so even run counts can produce half-integers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: String,
    pub case: CaseKind,
    pub solver: Method,
    pub median_iter: f64,
    pub median_feval: f64,
    pub median_cpu_s: f64,
    pub n_failed: usize,
    pub n_error: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricRow {
    pub problem: String,
    pub case: CaseKind,
    pub solver: Method,
    pub purity: f64,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRow {
    pub metric: String,
    pub solver: Method,
    pub tau: f64,
    pub rho: f64,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub metrics: Vec<MetricRow>,
    pub profiles: Vec<ProfileRow>,
}

/// FNV-1a substream seed from the master seed and a draw identity.
pub fn derive_seed(master: u64, parts: &[&str], index: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(&master.to_le_bytes());
    for part in parts {
        feed(part.as_bytes());
        feed(&[0xff]);
    }
    feed(&index.to_le_bytes());
    h
}

fn validate(cfg: &ExperimentConfig) -> Result<(), BenchError> {
    if cfg.problems.is_empty() {
        return Err(BenchError::InvalidConfig("no problems selected".into()));
    }
    if cfg.cases.is_empty() {
        return Err(BenchError::InvalidConfig("no cases selected".into()));
    }
    if cfg.solvers.is_empty() {
        return Err(BenchError::InvalidConfig("no solvers selected".into()));
    }
    if cfg.n_starts == 0 {
        return Err(BenchError::InvalidConfig("n_starts must be ≥ 1".into()));
    }
    if cfg.solver_cfg.epsilon.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(BenchError::InvalidConfig("epsilon must be positive".into()));
    }
    if cfg.solver_cfg.max_outer == 0 || cfg.solver_cfg.max_inner == 0 {
        return Err(BenchError::InvalidConfig(
            "iteration caps must be ≥ 1".into(),
        ));
    }
    if cfg.solver_cfg.l_init.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(BenchError::InvalidConfig("l_init must be positive".into()));
    }
    Ok(())
}

struct PreparedRun {
    problem_index: usize,
    case: CaseKind,
    solver: Method,
    start_index: usize,
    x0: Vec<f64>,
    model: NonsmoothModel,
}

/// Executes the full protocol for the given configuration.
///
/// For each (problem, case), `n_starts` uniform starts are drawn from the
/// problem box; Case ii samples one support model per start (or per problem
/// with `fixed_model`) shared across solvers. Individual run errors are
/// recorded, never fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, BenchError> {
    validate(cfg)?;
    let problems: Vec<ProblemInstance> = cfg
        .problems
        .iter()
        .map(|name| construct_problem(name))
        .collect::<Result<_, _>>()?;

    let mut prepared: Vec<PreparedRun> = Vec::new();
    for (pi, problem) in problems.iter().enumerate() {
        for &case in &cfg.cases {
            let starts: Vec<Vec<f64>> = (0..cfg.n_starts)
                .map(|s| {
                    let seed = derive_seed(cfg.seed, &[&problem.name, case.tag(), "x0"], s as u64);
                    problem
                        .domain
                        .sample_uniform(&mut ChaCha8Rng::seed_from_u64(seed))
                })
                .collect();
            let models: Vec<NonsmoothModel> = match case {
                CaseKind::CaseI => {
                    vec![NonsmoothModel::indicator(problem.domain.clone())]
                }
                CaseKind::CaseII => {
                    let count = if cfg.fixed_model { 1 } else { cfg.n_starts };
                    (0..count)
                        .map(|s| {
                            let seed = derive_seed(
                                cfg.seed,
                                &[&problem.name, case.tag(), "model"],
                                s as u64,
                            );
                            Ok(NonsmoothModel::Support(sample_support_model(
                                problem.n(),
                                problem.m(),
                                problem.domain.clone(),
                                seed,
                            )?))
                        })
                        .collect::<Result<_, BenchError>>()?
                }
            };
            for &solver in &cfg.solvers {
                for (s, x0) in starts.iter().enumerate() {
                    let model = if models.len() == 1 {
                        models[0].clone()
                    } else {
                        models[s].clone()
                    };
                    prepared.push(PreparedRun {
                        problem_index: pi,
                        case,
                        solver,
                        start_index: s,
                        x0: x0.clone(),
                        model,
                    });
                }
            }
        }
    }

    let execute = |spec: &PreparedRun| -> RunRecord {
        let problem = &problems[spec.problem_index];
        let result = match spec.solver {
            Method::Pgm => run_pgm(problem, &spec.model, &spec.x0, &cfg.solver_cfg),
            Method::Fgm => run_fgm(problem, &spec.model, &spec.x0, &cfg.solver_cfg),
        };
        let theory = check_run(problem, &result, &cfg.solver_cfg);
        let convex_rate = (problem.name == "SHARED-MIN")
            .then(|| {
                let x_star = vec![0.0; problem.n()];
                evaluate_f(problem, &spec.model, &x_star)
                    .ok()
                    .map(|f_star| convex_rate_check(&result, &f_star, problem, &cfg.solver_cfg))
            })
            .flatten();
        RunRecord {
            problem: problem.name.clone(),
            case: spec.case,
            solver: spec.solver,
            start_index: spec.start_index,
            master_seed: cfg.seed,
            solver_cfg: cfg.solver_cfg,
            x0: spec.x0.clone(),
            model: match &spec.model {
                NonsmoothModel::Support(m) => Some(m.clone()),
                NonsmoothModel::Indicator(_) => None,
            },
            result,
            theory,
            convex_rate,
        }
    };

    let mut runs: Vec<RunRecord> = if cfg.jobs == 1 {
        prepared.iter().map(execute).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs) // 0 = runtime default
            .build()
            .map_err(|e| BenchError::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| prepared.par_iter().map(execute).collect())
    };
    runs.sort_by(|a, b| {
        (&a.problem, a.case.tag(), a.solver.tag(), a.start_index).cmp(&(
            &b.problem,
            b.case.tag(),
            b.solver.tag(),
            b.start_index,
        ))
    });

    let summary = summarize(cfg, &runs);
    let (metrics, profiles) = compute_metrics(cfg, &runs);
    Ok(ExperimentOutput {
        runs,
        summary,
        metrics,
        profiles,
    })
}

/// Midpoint-rule median; empty input yields NaN.
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Builds the median summary rows. Failed runs enter the medians at the
/// iteration cap (that is what their counters hold); aborted (error) runs
/// are excluded from medians and counted separately.
pub fn summarize(cfg: &ExperimentConfig, runs: &[RunRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for name in &cfg.problems {
        for &case in &cfg.cases {
            for &solver in &cfg.solvers {
                let group: Vec<&RunRecord> = runs
                    .iter()
                    .filter(|r| &r.problem == name && r.case == case && r.solver == solver)
                    .collect();
                if group.is_empty() {
                    continue;
                }
                let usable: Vec<&RunRecord> = group
                    .iter()
                    .copied()
                    .filter(|r| r.result.status != RunStatus::Error)
                    .collect();
                let mut iters: Vec<f64> = usable
                    .iter()
                    .map(|r| r.result.counters.iter as f64)
                    .collect();
                let mut fevals: Vec<f64> = usable
                    .iter()
                    .map(|r| r.result.counters.feval as f64)
                    .collect();
                let mut cpus: Vec<f64> = usable.iter().map(|r| r.result.wall_time).collect();
                rows.push(SummaryRow {
                    problem: name.clone(),
                    case,
                    solver,
                    median_iter: median(&mut iters),
                    median_feval: median(&mut fevals),
                    median_cpu_s: median(&mut cpus),
                    n_failed: group
                        .iter()
                        .filter(|r| r.result.status == RunStatus::MaxIterReached)
                        .count(),
                    n_error: group.len() - usable.len(),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.problem, a.case.tag(), a.solver.tag()).cmp(&(&b.problem, b.case.tag(), b.solver.tag()))
    });
    rows
}

/// Pareto metrics per (problem, case, solver) plus performance profiles per
/// metric across all (problem, case) columns.
pub fn compute_metrics(
    cfg: &ExperimentConfig,
    runs: &[RunRecord],
) -> (Vec<MetricRow>, Vec<ProfileRow>) {
    let mut rows = Vec::new();
    // costs[metric][solver][column]
    let metric_names = ["purity", "gamma", "delta"];
    let mut costs: Vec<Vec<Vec<Option<f64>>>> =
        vec![vec![Vec::new(); cfg.solvers.len()]; metric_names.len()];

    for name in &cfg.problems {
        for &case in &cfg.cases {
            let fronts: Vec<FrontApproximation> = cfg
                .solvers
                .iter()
                .map(|&solver| {
                    let outcomes: Vec<Vec<f64>> = runs
                        .iter()
                        .filter(|r| {
                            &r.problem == name
                                && r.case == case
                                && r.solver == solver
                                && r.result.status == RunStatus::Converged
                        })
                        .map(|r| r.result.final_f.clone())
                        .collect();
                    FrontApproximation::from_outcomes(solver.tag(), &outcomes)
                })
                .collect();
            let union: Vec<Vec<f64>> = fronts.iter().flat_map(|f| f.points.clone()).collect();
            let reference = FrontApproximation::from_outcomes("reference", &union).points;
            let extremes: Vec<(f64, f64)> = if reference.is_empty() {
                Vec::new()
            } else {
                (0..reference[0].len())
                    .map(|j| {
                        let lo = reference.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
                        let hi = reference
                            .iter()
                            .map(|p| p[j])
                            .fold(f64::NEG_INFINITY, f64::max);
                        (lo, hi)
                    })
                    .collect()
            };

            for (si, (&solver, front)) in cfg.solvers.iter().zip(&fronts).enumerate() {
                let pur = purity(front, &reference);
                let gam = (!front.points.is_empty()).then(|| spread_gamma(front));
                let del = if front.points.len() >= 2 {
                    spread_delta(front, &extremes)
                } else {
                    None
                };
                rows.push(MetricRow {
                    problem: name.clone(),
                    case,
                    solver,
                    purity: pur,
                    gamma: gam,
                    delta: del,
                    n_points: front.points.len(),
                });
                // Profile costs: smaller is better, so purity inverts;
                // purity 0 (or an empty front) never catches up.
                costs[0][si].push((pur > 0.0).then(|| 1.0 / pur));
                costs[1][si].push(gam);
                costs[2][si].push(del);
            }
        }
    }

    rows.sort_by(|a, b| {
        (&a.problem, a.case.tag(), a.solver.tag()).cmp(&(&b.problem, b.case.tag(), b.solver.tag()))
    });

    let mut profiles = Vec::new();
    for (metric_index, metric) in metric_names.iter().enumerate() {
        let steps = performance_profile(&costs[metric_index]);
        for (si, solver_steps) in steps.into_iter().enumerate() {
            for point in solver_steps {
                profiles.push(ProfileRow {
                    metric: metric.to_string(),
                    solver: cfg.solvers[si],
                    tau: point.tau,
                    rho: point.rho,
                });
            }
        }
    }
    profiles.sort_by(|a, b| {
        (&a.metric, a.solver.tag())
            .cmp(&(&b.metric, b.solver.tag()))
            .then(a.tau.total_cmp(&b.tau))
    });
    (rows, profiles)
}
