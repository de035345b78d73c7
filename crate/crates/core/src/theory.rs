//! Calculators for the theoretical quantities behind both solvers, plus
//! replay-style checks that assert the descent and rate inequalities on
//! recorded runs.
//!
//! The parameter-free analysis revolves around the smoothing constant
//!
//! ```text
//! L(ε) = ((1−ν)/(1+ν) · 1/(2ε))^{(1−ν)/(1+ν)} · M_ν^{2/(1+ν)}
//! ```
//!
//! which collapses to `M_ν` at ν = 1. From it derive the per-iteration line
//! search threshold `L̃_k`, its `θ`-only envelope `L̄(ξ)`, and the gap decay
//! bounds for both methods. The recurrence envelope `Γ_k` handles the convex
//! case via the scalar inequality
//! `γ_{k+1} ≤ γ_k − c·β_k·min{1, β_k^α/A}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::{HolderParams, ProblemInstance};
use crate::solvers::{fgm_acceptance_holds, Method, RunResult, SolverConfig};

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("rate bound needs k ≥ k̃₀, got k = {k} < {k_tilde0}")]
    BeforeBurnIn { k: usize, k_tilde0: usize },
}

/// Inputs of the gap decay bounds.
#[derive(Debug, Clone, Copy)]
pub struct RateInputs {
    /// Diameter of `dom(G)`.
    pub diameter: f64,
    /// `max_i f_i(x⁰)`.
    pub f0_max: f64,
    /// Lower bound on `min_i inf f_i`; any valid lower bound keeps the
    /// bounds valid.
    pub f_inf: f64,
    pub holder: HolderParams,
}

/// `L(ε)`; non-increasing in ε for ν < 1, constant `M_ν` at ν = 1.
pub fn smoothing_constant(nu: f64, m_nu: f64, eps: f64) -> f64 {
    debug_assert!(nu > 0.0 && nu <= 1.0 && m_nu > 0.0 && eps > 0.0);
    let q = (1.0 - nu) / (1.0 + nu);
    (q / (2.0 * eps)).powf(q) * m_nu.powf(2.0 / (1.0 + nu))
}

/// Line-search threshold `L̃_k`: the acceptance test holds at any trial
/// constant `≥ L̃_k`.
pub fn linesearch_threshold(theta: f64, s_minus_x_norm: f64, holder: &HolderParams) -> f64 {
    debug_assert!(theta < 0.0 && s_minus_x_norm > 0.0);
    let theta_abs = -theta;
    let first = smoothing_constant(holder.nu, holder.m_nu, 0.5 * theta_abs);
    let second = smoothing_constant(
        holder.nu,
        holder.m_nu,
        theta_abs * theta_abs / (4.0 * s_minus_x_norm * s_minus_x_norm),
    )
    .powf((1.0 + holder.nu) / (2.0 * holder.nu));
    first.max(second)
}

/// Envelope `L̄(ξ) ≥ L̃_k` whenever `|θ(x^k)| ≥ ξ`; non-increasing in ξ.
pub fn envelope_l_bar(xi: f64, diameter: f64, holder: &HolderParams) -> f64 {
    debug_assert!(xi > 0.0 && diameter > 0.0);
    let (nu, m) = (holder.nu, holder.m_nu);
    let q = (1.0 - nu) / (1.0 + nu);
    let first = (q / xi).powf(q) * m.powf(2.0 / (1.0 + nu));
    let second = (2.0 * (1.0 - nu) / (1.0 + nu)).powf((1.0 - nu) / (2.0 * nu))
        * m.powf(1.0 / nu)
        * (diameter / xi).powf((1.0 - nu) / nu);
    first.max(second)
}

/// Gap decay bound of the parameter-dependent method:
/// `min_{j≤k} |θ(x^j)|` never exceeds this.
pub fn rate_bound_pgm(inputs: &RateInputs, k: usize) -> f64 {
    let nu = inputs.holder.nu;
    let m = inputs.holder.m_nu;
    let df = inputs.f0_max - inputs.f_inf;
    let denom = nu * (k + 1) as f64;
    let first = (1.0 + nu) * df / denom;
    let second = ((1.0 + nu) * m.powf(1.0 / nu) * inputs.diameter.powf((1.0 + nu) / nu) * df
        / denom)
        .powf(nu / (1.0 + nu));
    first.max(second)
}

/// Gap decay bound of the parameter-free method, valid from the burn-in
/// index `k̃₀ = ⌈(log₂(L₋₁/L̃₀))₊⌉` on.
pub fn rate_bound_fgm(inputs: &RateInputs, k: usize, k_tilde0: usize) -> Result<f64, TheoryError> {
    if k < k_tilde0 {
        return Err(TheoryError::BeforeBurnIn { k, k_tilde0 });
    }
    let nu = inputs.holder.nu;
    let m = inputs.holder.m_nu;
    let df = inputs.f0_max - inputs.f_inf;
    let denom = (k + 1 - k_tilde0) as f64;
    let first = 4.0 * df / denom;
    let second = (2.0f64.powf(2.0 + 1.0 / nu)
        * m.powf(1.0 / nu)
        * inputs.diameter.powf((1.0 + nu) / nu)
        * df
        / denom)
        .powf(nu / (1.0 + nu));
    Ok(first.max(second))
}

/// Burn-in index after which the accepted `L_k` is controlled by the
/// thresholds: `⌈(log₂(l_init / l_tilde_0))₊⌉`.
pub fn fgm_burn_in(l_init: f64, l_tilde_0: f64) -> usize {
    ((l_init / l_tilde_0).log2().max(0.0)).ceil() as usize
}

/// Constants of the scalar recurrence `γ_{k+1} ≤ γ_k − c·β_k·min{1, β_k^α/A}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecurrenceParams {
    pub c: f64,
    pub alpha: f64,
    pub a: f64,
    /// `γ₀`, also used as the `γ_{k₀}` surrogate by
    /// [`recurrence_envelope`] (a valid upper bound since the sequence is
    /// non-increasing).
    pub gamma0: f64,
}

/// `k₀ = ⌈(1/c)·(ln(γ₀/(c·A^{1/α})))₊⌉`.
pub fn recurrence_k0(params: &RecurrenceParams) -> usize {
    let arg = params.gamma0 / (params.c * params.a.powf(1.0 / params.alpha));
    let positive_part = arg.ln().max(0.0);
    ((positive_part / params.c).ceil()) as usize
}

/// `(Γ_k, k₀)` with `γ₀` standing in for `γ_{k₀}`. Valid (if loose) because
/// `Γ_k` is increasing in `γ_{k₀}` and the sequence is non-increasing.
pub fn recurrence_envelope(params: &RecurrenceParams, k: usize) -> (f64, usize) {
    recurrence_envelope_with(params, k, params.gamma0)
}

/// `(Γ_k, k₀)` with an explicit `γ_{k₀}` taken from the actual sequence.
pub fn recurrence_envelope_with(
    params: &RecurrenceParams,
    k: usize,
    gamma_k0: f64,
) -> (f64, usize) {
    let k0 = recurrence_k0(params);
    debug_assert!(k >= k0, "envelope defined for k ≥ k₀");
    let base = gamma_k0.powf(-params.alpha) + params.c * params.alpha * (k - k0) as f64 / params.a;
    ((1.0 / base).powf(1.0 / params.alpha), k0)
}

/// Relative grace applied to replayed inequalities so `powf` rounding never
/// reports a phantom violation.
const REL_GRACE: f64 = 1e-12;
/// Absolute slack on the per-iteration decrease lower bound.
const DESCENT_BOUND_SLACK: f64 = 1e-9;

/// Outcome of one replayed inequality family.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct CheckOutcome {
    /// Whether the check applies to this run at all.
    pub applicable: bool,
    /// Number of individual inequalities evaluated.
    pub checked: usize,
    pub violations: usize,
    /// Largest violation magnitude observed (0 when clean).
    pub worst: f64,
}

impl CheckOutcome {
    fn inapplicable() -> Self {
        CheckOutcome::default()
    }

    fn new() -> Self {
        CheckOutcome {
            applicable: true,
            ..CheckOutcome::default()
        }
    }

    fn record(&mut self, violation: f64) {
        self.checked += 1;
        if violation > 0.0 {
            self.violations += 1;
            self.worst = self.worst.max(violation);
        }
    }

    pub fn clean(&self) -> bool {
        !self.applicable || self.violations == 0
    }
}

/// Replayed theory checks for a single run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryReport {
    /// `F(x^{k+1}) ⪯ F(x^k) + slack·e` along the whole trace.
    pub monotone: CheckOutcome,
    /// Per-iteration decrease of the parameter-dependent method dominates
    /// the descent-lemma lower bound.
    pub pgm_descent_bound: CheckOutcome,
    /// The accepted `(L_k, t_k, x^{k+1})` satisfies the acceptance test on
    /// exact re-evaluation.
    pub fgm_acceptance: CheckOutcome,
    /// Per-iteration decrease of the parameter-free method dominates the
    /// bound the acceptance test implies:
    /// `(|θ|/4)·min{1, |θ|/(2·L_k‖s−x‖²)}`.
    pub fgm_descent_bound: CheckOutcome,
    /// `L_k ≤ 2·max_{j≤k} L̃_j` past the burn-in index.
    pub fgm_l_growth: CheckOutcome,
    /// `L̃_k ≤ L̄(|θ(x^k)|)` at every iteration.
    pub fgm_threshold_envelope: CheckOutcome,
    /// Line-search trial counts stay strictly below the cap.
    pub fgm_trials_under_cap: CheckOutcome,
    /// `min_{j≤k}|θ(x^j)|` is dominated by the method's rate bound.
    pub rate_bound: CheckOutcome,
    /// Burn-in index `k̃₀` (parameter-free runs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl TheoryReport {
    pub fn clean(&self) -> bool {
        self.monotone.clean()
            && self.pgm_descent_bound.clean()
            && self.fgm_acceptance.clean()
            && self.fgm_descent_bound.clean()
            && self.fgm_l_growth.clean()
            && self.fgm_threshold_envelope.clean()
            && self.fgm_trials_under_cap.clean()
            && self.rate_bound.clean()
    }
}

/// The componentwise objective trace `F(x⁰), …, F(x^K)` of a run (records
/// hold the pre-step values; the final iterate's value is stored on the
/// run).
fn f_trace(run: &RunResult) -> Vec<&[f64]> {
    let mut trace: Vec<&[f64]> = run.records.iter().map(|r| r.f_x.as_slice()).collect();
    if !run.final_f.is_empty() {
        trace.push(run.final_f.as_slice());
    }
    trace
}

/// θ trace including the terminal oracle value when available.
fn theta_trace(run: &RunResult) -> Vec<f64> {
    let mut t: Vec<f64> = run.records.iter().map(|r| r.theta).collect();
    if run.final_theta.is_finite() {
        t.push(run.final_theta);
    }
    t
}

/// Replays every applicable inequality on a recorded run.
pub fn check_run(problem: &ProblemInstance, run: &RunResult, cfg: &SolverConfig) -> TheoryReport {
    let holder = problem.holder;
    let trace = f_trace(run);
    let m = problem.m();

    let mut monotone = CheckOutcome::new();
    for pair in trace.windows(2) {
        for (prev, next) in pair[0].iter().zip(pair[1]) {
            monotone.record(next - prev - cfg.descent_slack);
        }
    }

    let mut pgm_descent_bound = CheckOutcome::inapplicable();
    if run.method == Method::Pgm && !run.records.is_empty() {
        pgm_descent_bound = CheckOutcome::new();
        for (k, rec) in run.records.iter().enumerate() {
            let Some(f_next) = trace.get(k + 1) else {
                break;
            };
            let theta_abs = -rec.theta;
            let ratio = (theta_abs / (holder.m_nu * rec.s_dist.powf(1.0 + holder.nu)))
                .powf(1.0 / holder.nu);
            let bound = holder.nu / (1.0 + holder.nu) * theta_abs * ratio.min(1.0);
            for i in 0..m {
                let decrease = rec.f_x[i] - f_next[i];
                pgm_descent_bound.record(bound - decrease - DESCENT_BOUND_SLACK);
            }
        }
    }

    let mut fgm_acceptance = CheckOutcome::inapplicable();
    let mut fgm_descent_bound = CheckOutcome::inapplicable();
    let mut fgm_l_growth = CheckOutcome::inapplicable();
    let mut fgm_threshold_envelope = CheckOutcome::inapplicable();
    let mut fgm_trials_under_cap = CheckOutcome::inapplicable();
    let mut burn_in = None;
    if run.method == Method::Fgm && !run.records.is_empty() {
        fgm_acceptance = CheckOutcome::new();
        fgm_descent_bound = CheckOutcome::new();
        fgm_threshold_envelope = CheckOutcome::new();
        fgm_trials_under_cap = CheckOutcome::new();
        for (k, rec) in run.records.iter().enumerate() {
            if let Some(f_next) = trace.get(k + 1) {
                let ok = fgm_acceptance_holds(
                    &rec.f_x,
                    f_next,
                    rec.step,
                    -rec.theta,
                    rec.l_k.unwrap_or(f64::NAN),
                    rec.s_dist * rec.s_dist,
                );
                fgm_acceptance.record(if ok { 0.0 } else { 1.0 });
                // Decrease bound implied by the acceptance inequality with
                // t_k = min{1, |θ|/(2L_k d²)}.
                let theta_abs = -rec.theta;
                let l_k = rec.l_k.unwrap_or(f64::NAN);
                let ratio = theta_abs / (2.0 * l_k * rec.s_dist * rec.s_dist);
                let bound = 0.25 * theta_abs * ratio.min(1.0);
                for i in 0..m {
                    let decrease = rec.f_x[i] - f_next[i];
                    fgm_descent_bound.record(bound - decrease - DESCENT_BOUND_SLACK);
                }
            }
            let trials = rec.inner_trials.unwrap_or(0);
            fgm_trials_under_cap.record(trials as f64 - (cfg.max_inner as f64 - 0.5));

            let l_tilde = linesearch_threshold(rec.theta, rec.s_dist, &holder);
            let l_bar = envelope_l_bar(-rec.theta, problem.domain.diameter(), &holder);
            fgm_threshold_envelope.record(l_tilde - l_bar * (1.0 + REL_GRACE));
        }

        let first = &run.records[0];
        let l_tilde0 = linesearch_threshold(first.theta, first.s_dist, &holder);
        let k_tilde0 = fgm_burn_in(cfg.l_init, l_tilde0);
        burn_in = Some(k_tilde0);

        fgm_l_growth = CheckOutcome::new();
        let mut max_threshold = f64::NEG_INFINITY;
        for (k, rec) in run.records.iter().enumerate() {
            max_threshold = max_threshold.max(linesearch_threshold(rec.theta, rec.s_dist, &holder));
            if k >= k_tilde0 {
                let l_k = rec.l_k.unwrap_or(f64::NAN);
                fgm_l_growth.record(l_k - 2.0 * max_threshold * (1.0 + REL_GRACE));
            }
        }
    }

    let mut rate_bound = CheckOutcome::inapplicable();
    let thetas = theta_trace(run);
    if !run.records.is_empty() && !thetas.is_empty() {
        rate_bound = CheckOutcome::new();
        let inputs = RateInputs {
            diameter: problem.domain.diameter(),
            f0_max: run.records[0]
                .f_x
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max),
            f_inf: problem.h_lower_bound(),
            holder,
        };
        let mut min_theta_abs = f64::INFINITY;
        for (k, &theta) in thetas.iter().enumerate() {
            min_theta_abs = min_theta_abs.min(theta.abs());
            let bound = match run.method {
                Method::Pgm => Some(rate_bound_pgm(&inputs, k)),
                Method::Fgm => {
                    let k_tilde0 = burn_in.unwrap_or(0);
                    (k >= k_tilde0).then(|| rate_bound_fgm(&inputs, k, k_tilde0).expect("k ≥ k̃₀"))
                }
            };
            if let Some(bound) = bound {
                rate_bound.record(min_theta_abs - bound * (1.0 + REL_GRACE));
            }
        }
    }

    TheoryReport {
        monotone,
        pgm_descent_bound,
        fgm_acceptance,
        fgm_descent_bound,
        fgm_l_growth,
        fgm_threshold_envelope,
        fgm_trials_under_cap,
        rate_bound,
        burn_in,
    }
}

/// Convex-case rate report: the inequality chain `0 ≤ δ_k(x*) ≤ |θ(x^k)|`
/// and the recurrence envelope on `δ_k(x*) = min_i{F_i(x^k) − F_i(x*)}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexRateReport {
    /// False (with a note) when `F(x*) ⪯ F(x^k)` failed at some iterate,
    /// which voids the theorem's hypothesis.
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub delta_chain: CheckOutcome,
    pub envelope: CheckOutcome,
    pub k0: usize,
    pub k_tilde0: usize,
}

impl ConvexRateReport {
    pub fn clean(&self) -> bool {
        !self.applicable || (self.delta_chain.clean() && self.envelope.clean())
    }
}

/// Checks the convex-case theorems on a recorded run against a point `x*`
/// with `F(x*) ⪯ F(x^k)` for all recorded `k` (e.g. a shared minimizer).
/// `f_star` is `F(x*)` componentwise.
pub fn convex_rate_check(
    run: &RunResult,
    f_star: &[f64],
    problem: &ProblemInstance,
    cfg: &SolverConfig,
) -> ConvexRateReport {
    let trace = f_trace(run);
    let thetas = theta_trace(run);
    let hypothesis_ok = trace
        .iter()
        .all(|f| f.iter().zip(f_star).all(|(&fi, &si)| si <= fi + 1e-9));
    if !hypothesis_ok || trace.is_empty() {
        return ConvexRateReport {
            applicable: false,
            note: Some("F(x*) ⪯ F(x^k) failed on the trace; theorem hypothesis void".into()),
            delta_chain: CheckOutcome::inapplicable(),
            envelope: CheckOutcome::inapplicable(),
            k0: 0,
            k_tilde0: 0,
        };
    }

    let deltas: Vec<f64> = trace
        .iter()
        .map(|f| {
            f.iter()
                .zip(f_star)
                .map(|(&fi, &si)| fi - si)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let mut delta_chain = CheckOutcome::new();
    for (&delta, &theta) in deltas.iter().zip(&thetas) {
        delta_chain.record(-delta - 1e-9); // δ_k ≥ 0
        delta_chain.record(delta - theta.abs() - 1e-9 * (1.0 + theta.abs())); // δ_k ≤ |θ_k|
    }

    let holder = problem.holder;
    let diameter = problem.domain.diameter();
    let (c, a, k_tilde0) = match run.method {
        Method::Pgm => (
            holder.nu / (1.0 + holder.nu),
            holder.m_nu.powf(1.0 / holder.nu) * diameter.powf((1.0 + holder.nu) / holder.nu),
            0,
        ),
        Method::Fgm => {
            let first = &run.records[0];
            let l_tilde0 = linesearch_threshold(first.theta, first.s_dist, &holder);
            (
                0.25,
                (2.0 * holder.m_nu).powf(1.0 / holder.nu)
                    * diameter.powf((1.0 + holder.nu) / holder.nu),
                fgm_burn_in(cfg.l_init, l_tilde0),
            )
        }
    };

    let mut envelope = CheckOutcome::inapplicable();
    let mut k0 = 0;
    if deltas.len() > k_tilde0 {
        // The recurrence runs over the shifted sequence γ_j = δ_{j + k̃₀}.
        let params = RecurrenceParams {
            c,
            alpha: 1.0 / holder.nu,
            a,
            gamma0: deltas[k_tilde0],
        };
        k0 = recurrence_k0(&params);
        if deltas.len() > k_tilde0 + k0 {
            envelope = CheckOutcome::new();
            let gamma_k0 = deltas[k_tilde0 + k0];
            for (k, &delta) in deltas.iter().enumerate().skip(k_tilde0 + k0) {
                let (bound, _) = recurrence_envelope_with(&params, k - k_tilde0, gamma_k0);
                envelope.record(delta - bound * (1.0 + REL_GRACE) - 1e-12);
            }
        }
    }

    ConvexRateReport {
        applicable: true,
        note: None,
        delta_chain,
        envelope,
        k0,
        k_tilde0,
    }
}

/// Convenience for tests: synthesize the worst-case recurrence
/// `γ_{k+1} = γ_k − c·γ_k·min{1, γ_k^α/A}` with `β_k = γ_k`.
pub fn simulate_recurrence(params: &RecurrenceParams, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut gamma = params.gamma0;
    out.push(gamma);
    for _ in 0..steps {
        let drop = params.c * gamma * (gamma.powf(params.alpha) / params.a).min(1.0);
        gamma = (gamma - drop).max(0.0);
        out.push(gamma);
    }
    out
}
