//! The gap-function oracle: computes `θ(x)` and a linearized minimizer
//! `s(x)` of
//!
//! ```text
//! θ(x) = min_u max_i { g_i(u) − g_i(x) + ⟨∇h_i(x), u − x⟩ }
//! ```
//!
//! via an epigraph LP. In Case i (indicator) the LP has variables `(u, τ)`
//! with `u` confined to the box; in Case ii (support functions) the inner
//! `g_i(u)` is replaced by its LP dual `min{⟨b_i, w_i⟩ : C_iᵀ w_i = u,
//! w_i ⪰ 0}`, making the whole subproblem a single LP over `(τ, u, w)`.
//!
//! `θ(x) ≤ 0` always holds mathematically; LP rounding can report a tiny
//! positive value, which the oracle clamps back to zero.

use thiserror::Error;

use crate::linalg;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, DEFAULT_FEAS_TOL};
use crate::models::{IndicatorModel, ModelError, NonsmoothModel, SupportFunctionModel};
use crate::problems::ProblemInstance;

/// Tolerance on the recovered `C_iᵀ w_i = u` identity in Case ii.
const DUAL_ENCODING_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum GapError {
    #[error("gap subproblem LP ended with status {0:?}")]
    LpFailed(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("dual encoding violated: ‖C_iᵀw_i − u‖∞ = {0:.3e}")]
    DualEncoding(f64),
    #[error("brute-force gap oracle caps at n ≤ 3, got n = {0}")]
    OracleSizeCap(usize),
}

/// Solution of the linearized subproblem at a point `x`.
#[derive(Debug, Clone)]
pub struct GapResult {
    /// Gap value, clamped to `≤ 0`.
    pub theta: f64,
    /// A minimizer `s(x)` inside the domain box.
    pub s: Vec<f64>,
    /// Linearized value per objective at `s`; `theta = max(per_objective)`
    /// up to LP tolerance.
    pub per_objective: Vec<f64>,
    /// Number of `g` evaluations the oracle consumed (the `g_i(x)` terms).
    pub fevals_charged: usize,
}

/// Case i oracle: `g ≡ 0` on the box, so the subproblem is
/// `min τ s.t. ⟨∇h_i(x), u − x⟩ ≤ τ, u ∈ Ω`.
pub fn solve_gap_case_i(
    problem: &ProblemInstance,
    model: &IndicatorModel,
    x: &[f64],
) -> Result<GapResult, GapError> {
    let n = problem.n();
    debug_assert_eq!(x.len(), n);
    let jac = problem.evaluate_jacobian(x);

    // Variables: u (box-bounded), then τ (free).
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::minimize(objective);
    lp.a_ub = jac
        .iter()
        .map(|grad| {
            let mut row: Vec<f64> = grad.clone();
            row.push(-1.0);
            row
        })
        .collect();
    lp.b_ub = jac.iter().map(|grad| linalg::dot(grad, x)).collect();
    lp.bounds = model
        .domain
        .lower
        .iter()
        .zip(&model.domain.upper)
        .map(|(&l, &u)| (l, u))
        .collect();
    lp.bounds.push((f64::NEG_INFINITY, f64::INFINITY));

    let sol = solve_lp(&lp, DEFAULT_FEAS_TOL)?;
    if sol.status != LpStatus::Optimal {
        // Ω is nonempty and compact, so anything but Optimal is a bug or a
        // numerical failure.
        return Err(GapError::LpFailed(sol.status));
    }
    let s = sol.x[..n].to_vec();
    let diff = linalg::sub(&s, x);
    let per_objective: Vec<f64> = jac.iter().map(|grad| linalg::dot(grad, &diff)).collect();
    let theta = sol.objective_value.min(0.0);
    Ok(GapResult {
        theta,
        s,
        per_objective,
        fevals_charged: 0,
    })
}

/// Case ii oracle over `(τ, u, w_1, …, w_m)`:
///
/// ```text
/// min τ   s.t.  ⟨b_i, w_i⟩ − g_i(x) + ⟨∇h_i(x), u − x⟩ ≤ τ
///               C_iᵀ w_i = u,  w_i ⪰ 0,  x^L ⪯ u ⪯ x^U
/// ```
///
/// charging one `g` evaluation per objective for the `g_i(x)` terms.
pub fn solve_gap_case_ii(
    problem: &ProblemInstance,
    model: &SupportFunctionModel,
    x: &[f64],
) -> Result<GapResult, GapError> {
    let n = problem.n();
    let m = problem.m();
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(model.m(), m);
    let jac = problem.evaluate_jacobian(x);
    let g_x: Vec<f64> = (0..m)
        .map(|i| model.evaluate(i, x))
        .collect::<Result<_, _>>()?;

    // Column layout: u (n, boxed) | τ (free) | w_i blocks (2n each, ⪰ 0).
    let tau_col = n;
    let w_col = |i: usize, r: usize| n + 1 + i * 2 * n + r;
    let total = n + 1 + 2 * n * m;

    let mut objective = vec![0.0; total];
    objective[tau_col] = 1.0;
    let mut lp = LinearProgram::minimize(objective);

    for (i, grad) in jac.iter().enumerate() {
        let mut row = vec![0.0; total];
        row[..n].copy_from_slice(grad);
        row[tau_col] = -1.0;
        for r in 0..2 * n {
            row[w_col(i, r)] = model.delta;
        }
        lp.a_ub.push(row);
        lp.b_ub.push(g_x[i] + linalg::dot(grad, x));
    }
    for i in 0..m {
        let b = &model.b_mats[i];
        for j in 0..n {
            // C_iᵀ w_i = B_iᵀ w⁺ − B_iᵀ w⁻ = u, coordinate j.
            let mut row = vec![0.0; total];
            for (r, b_row) in b.iter().enumerate() {
                row[w_col(i, r)] = b_row[j];
                row[w_col(i, n + r)] = -b_row[j];
            }
            row[j] = -1.0;
            lp.a_eq.push(row);
            lp.b_eq.push(0.0);
        }
    }
    lp.bounds = model
        .domain
        .lower
        .iter()
        .zip(&model.domain.upper)
        .map(|(&l, &u)| (l, u))
        .collect();
    lp.bounds.push((f64::NEG_INFINITY, f64::INFINITY));
    lp.bounds.extend(vec![(0.0, f64::INFINITY); 2 * n * m]);

    let sol = solve_lp(&lp, DEFAULT_FEAS_TOL)?;
    if sol.status != LpStatus::Optimal {
        return Err(GapError::LpFailed(sol.status));
    }
    let s = sol.x[..n].to_vec();

    // Sanity of the dual encoding: the recovered w_i must reproduce u.
    let mut worst = 0.0f64;
    for i in 0..m {
        let b = &model.b_mats[i];
        for j in 0..n {
            let mut v = 0.0;
            for (r, b_row) in b.iter().enumerate() {
                v += b_row[j] * (sol.x[w_col(i, r)] - sol.x[w_col(i, n + r)]);
            }
            worst = worst.max((v - s[j]).abs());
        }
    }
    if worst > DUAL_ENCODING_TOL {
        return Err(GapError::DualEncoding(worst));
    }

    let diff = linalg::sub(&s, x);
    // Row values with the dual surrogate ⟨b_i, w_i⟩ in place of g_i(s):
    // exact for every binding objective, an upper bound otherwise.
    let per_objective: Vec<f64> = (0..m)
        .map(|i| {
            let dual_g: f64 = (0..2 * n).map(|r| model.delta * sol.x[w_col(i, r)]).sum();
            dual_g - g_x[i] + linalg::dot(&jac[i], &diff)
        })
        .collect();
    let theta = sol.objective_value.min(0.0);
    Ok(GapResult {
        theta,
        s,
        per_objective,
        fevals_charged: m,
    })
}

/// Dispatches on the model case.
pub fn solve_gap(
    problem: &ProblemInstance,
    model: &NonsmoothModel,
    x: &[f64],
) -> Result<GapResult, GapError> {
    match model {
        NonsmoothModel::Indicator(ind) => solve_gap_case_i(problem, ind, x),
        NonsmoothModel::Support(sup) => solve_gap_case_ii(problem, sup, x),
    }
}

/// Number of LP solves one oracle call costs for this model.
pub fn gap_lp_cost(problem: &ProblemInstance, model: &NonsmoothModel) -> usize {
    match model {
        NonsmoothModel::Indicator(_) => 1,
        NonsmoothModel::Support(_) => problem.m() + 1,
    }
}

/// Exhaustive grid oracle for the gap subproblem (tests only, `n ≤ 3`):
/// evaluates the inner max over a uniform grid on the domain box and returns
/// the grid minimizer. Grid values of `θ` upper-bound the true `θ(x)` by the
/// grid resolution times a local Lipschitz constant.
pub fn brute_force_gap(
    problem: &ProblemInstance,
    model: &NonsmoothModel,
    x: &[f64],
    grid_per_dim: usize,
) -> Result<GapResult, GapError> {
    let n = problem.n();
    if n > 3 {
        return Err(GapError::OracleSizeCap(n));
    }
    assert!(grid_per_dim >= 2);
    let m = problem.m();
    let domain = model.domain();
    let jac = problem.evaluate_jacobian(x);
    let g_x: Vec<f64> = (0..m)
        .map(|i| model.evaluate_g(i, x))
        .collect::<Result<_, _>>()?;

    let mut fevals = m;
    let mut best_val = f64::INFINITY;
    let mut best_u = x.to_vec();
    let mut best_rows = vec![0.0; m];
    let mut idx = vec![0usize; n];
    loop {
        let u: Vec<f64> = (0..n)
            .map(|j| {
                let t = idx[j] as f64 / (grid_per_dim - 1) as f64;
                domain.lower[j] + t * (domain.upper[j] - domain.lower[j])
            })
            .collect();
        let diff = linalg::sub(&u, x);
        let mut rows = vec![0.0; m];
        let mut val = f64::NEG_INFINITY;
        for (i, row) in rows.iter_mut().enumerate() {
            let g_u = model.evaluate_g(i, &u)?;
            *row = g_u - g_x[i] + linalg::dot(&jac[i], &diff);
            val = val.max(*row);
        }
        fevals += m;
        if val < best_val {
            best_val = val;
            best_u = u;
            best_rows = rows;
        }
        // Odometer increment over the grid indices.
        let mut carry = 0;
        while carry < n {
            idx[carry] += 1;
            if idx[carry] < grid_per_dim {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == n {
            break;
        }
    }
    Ok(GapResult {
        theta: best_val,
        s: best_u,
        per_objective: best_rows,
        fevals_charged: fevals,
    })
}
