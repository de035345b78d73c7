//! Dense linear programs and a deterministic two-phase simplex solver.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c·x
//! subject to  A_eq x  = b_eq
//!             A_ub x ≤ b_ub
//!             lower ⪯ x ⪯ upper      (entries may be ±∞)
//! ```
//!
//! Internally every variable is shifted, mirrored or split into nonnegative
//! parts, finite upper bounds become inequality rows, and the standard-form
//! problem is solved with a two-phase tableau simplex: Dantzig pricing with a
//! switch to Bland's rule after a run of degenerate pivots. All tie-breaking
//! is by lowest index, so identical inputs produce identical outputs.
//!
//! [`brute_force_lp`] enumerates active-set vertices of small instances and
//! exists purely as an independent test oracle for [`solve_lp`].

// Indexed loops are clearer for tableau operations.
#![allow(clippy::needless_range_loop)]

use thiserror::Error;

use crate::linalg;

/// Default primal feasibility tolerance.
pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

/// Reduced costs above `-OPT_TOL` are considered optimal.
const OPT_TOL: f64 = 1e-9;
/// Entries with magnitude below this never serve as pivots.
const PIVOT_TOL: f64 = 1e-9;
/// Number of degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_PIVOT_CAP: usize = 1000;
/// Stand-in box for missing bounds in the brute-force oracle.
const ORACLE_BIG_BOUND: f64 = 1e9;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("inconsistent dimensions in linear program: {0}")]
    Dimensions(String),
    #[error("invalid bounds for variable {var}: lower {lower} > upper {upper}")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("brute-force oracle caps at {max_vars} variables / {max_cons} constraints, got {vars} / {cons}")]
    OracleSizeCap {
        max_vars: usize,
        max_cons: usize,
        vars: usize,
        cons: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivoting stalled beyond the iteration cap or the final point failed
    /// the feasibility verification. Callers must treat this as a hard
    /// error, never as an optimum.
    NumericalFailure,
}

/// A dense LP in the form documented at module level.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    /// Per-variable `(lower, upper)`; use `±f64::INFINITY` for free directions.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// An unconstrained minimization of `c·x` over free variables; add
    /// constraints by filling the public fields.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.a_eq.len() != self.b_eq.len() {
            return Err(LpError::Dimensions(format!(
                "{} equality rows vs {} right-hand sides",
                self.a_eq.len(),
                self.b_eq.len()
            )));
        }
        if self.a_ub.len() != self.b_ub.len() {
            return Err(LpError::Dimensions(format!(
                "{} inequality rows vs {} right-hand sides",
                self.a_ub.len(),
                self.b_ub.len()
            )));
        }
        for (i, row) in self.a_eq.iter().chain(self.a_ub.iter()).enumerate() {
            if row.len() != n {
                return Err(LpError::Dimensions(format!(
                    "constraint row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
        }
        if self.bounds.len() != n {
            return Err(LpError::Dimensions(format!(
                "{} bound pairs for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (var, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo > hi || lo.is_nan() || hi.is_nan() {
                return Err(LpError::InvalidBounds {
                    var,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    /// Worst feasibility violation of `x`: max over equality residuals,
    /// inequality excess and bound excess.
    pub fn feasibility_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, &b) in self.a_eq.iter().zip(&self.b_eq) {
            worst = worst.max((linalg::dot(row, x) - b).abs());
        }
        for (row, &b) in self.a_ub.iter().zip(&self.b_ub) {
            worst = worst.max(linalg::dot(row, x) - b);
        }
        for (&xj, &(lo, hi)) in x.iter().zip(&self.bounds) {
            if lo.is_finite() {
                worst = worst.max(lo - xj);
            }
            if hi.is_finite() {
                worst = worst.max(xj - hi);
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, n: usize) -> Self {
        LpSolution {
            status,
            x: vec![0.0; n],
            objective_value: f64::NAN,
        }
    }
}

/// How an original variable maps onto the nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + y[col]`
    Shift { col: usize, lower: f64 },
    /// `x = upper − y[col]`
    Mirror { col: usize, upper: f64 },
    /// `x = y[pos] − y[neg]`
    Split { pos: usize, neg: usize },
}

/// Solves the LP with the two-phase simplex method.
///
/// `feas_tol` governs the final feasibility verification (scaled by row
/// magnitude so huge-coefficient rows are judged relative to their scale).
/// The returned status reports infeasibility and unboundedness faithfully;
/// `NumericalFailure` is returned when pivoting exceeds
/// `50·(#columns + #rows)` iterations or verification fails.
pub fn solve_lp(lp: &LinearProgram, feas_tol: f64) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.n_vars();

    // Map original variables onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut n_struct = 0usize;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new(); // (column, cap): y_col ≤ cap
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            let col = n_struct;
            n_struct += 1;
            maps.push(VarMap::Shift { col, lower: lo });
            if hi.is_finite() {
                upper_rows.push((col, hi - lo));
            }
        } else if hi.is_finite() {
            let col = n_struct;
            n_struct += 1;
            maps.push(VarMap::Mirror { col, upper: hi });
        } else {
            let pos = n_struct;
            let neg = n_struct + 1;
            n_struct += 2;
            maps.push(VarMap::Split { pos, neg });
        }
    }

    let n_eq = lp.a_eq.len();
    let n_ub = lp.a_ub.len() + upper_rows.len();
    let n_rows = n_eq + n_ub;
    let n_slack = n_ub;

    // Assemble rows over structural + slack columns; rhs kept separately.
    let width = n_struct + n_slack;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_rows);
    let mut rhs: Vec<f64> = Vec::with_capacity(n_rows);
    let transform_row = |row: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; width];
        let mut b_adj = b;
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lower } => {
                    out[col] += a;
                    b_adj -= a * lower;
                }
                VarMap::Mirror { col, upper } => {
                    out[col] -= a;
                    b_adj -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, b_adj)
    };
    for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        let (r, b_adj) = transform_row(row, b);
        rows.push(r);
        rhs.push(b_adj);
    }
    let mut slack = 0usize;
    for (row, &b) in lp.a_ub.iter().zip(&lp.b_ub) {
        let (mut r, b_adj) = transform_row(row, b);
        r[n_struct + slack] = 1.0;
        slack += 1;
        rows.push(r);
        rhs.push(b_adj);
    }
    for &(col, cap) in &upper_rows {
        let mut r = vec![0.0; width];
        r[col] = 1.0;
        r[n_struct + slack] = 1.0;
        slack += 1;
        rows.push(r);
        rhs.push(cap);
    }

    // Nonnegative rhs, then artificials where no slack can start basic.
    let mut needs_artificial = vec![false; n_rows];
    for (i, row) in rows.iter_mut().enumerate() {
        if rhs[i] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            rhs[i] = -rhs[i];
        }
        let slack_ok = i >= n_eq && row[n_struct + (i - n_eq)] > 0.0;
        needs_artificial[i] = !slack_ok;
    }
    let n_art = needs_artificial.iter().filter(|&&x| x).count();
    let total_cols = width + n_art;

    // Tableau rows carry [columns..., rhs].
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(n_rows);
    let mut basis: Vec<usize> = Vec::with_capacity(n_rows);
    let mut art = width;
    for (i, mut row) in rows.into_iter().enumerate() {
        row.resize(total_cols + 1, 0.0);
        row[total_cols] = rhs[i];
        if needs_artificial[i] {
            row[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(n_struct + (i - n_eq));
        }
        tab.push(row);
    }

    let max_pivots = 50 * (total_cols + n_rows);
    let mut pivots_used = 0usize;
    let is_artificial = |col: usize| col >= width;

    // Phase 1: minimize the artificial sum.
    if n_art > 0 {
        let mut cost = vec![0.0; total_cols + 1];
        for col in width..total_cols {
            cost[col] = 1.0;
        }
        for (i, &b) in basis.iter().enumerate() {
            if is_artificial(b) {
                for c in 0..=total_cols {
                    cost[c] -= tab[i][c];
                }
            }
        }
        match run_phase(
            &mut tab,
            &mut cost,
            &mut basis,
            &|_| true,
            max_pivots,
            &mut pivots_used,
        ) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded | PhaseOutcome::CapHit => {
                return Ok(LpSolution::non_optimal(LpStatus::NumericalFailure, n));
            }
        }
        let phase1_value = -cost[total_cols];
        let b_scale = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if phase1_value > 1e-8 * (1.0 + b_scale) {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, n));
        }
        // Drive leftover artificials out of the basis where possible.
        for i in 0..n_rows {
            if !is_artificial(basis[i]) {
                continue;
            }
            if let Some(col) = (0..width).find(|&c| tab[i][c].abs() > PIVOT_TOL) {
                let mut scratch_cost = vec![0.0; total_cols + 1];
                pivot(&mut tab, &mut scratch_cost, &mut basis, i, col);
            }
            // Otherwise the row is redundant; the zero-level artificial stays.
        }
    }

    // Phase 2: original objective over standard-form columns.
    let mut cost = vec![0.0; total_cols + 1];
    for (j, &c) in lp.objective.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Mirror { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }
    for (i, &b) in basis.iter().enumerate() {
        let c_b = cost[b];
        if c_b != 0.0 {
            for c in 0..=total_cols {
                cost[c] -= c_b * tab[i][c];
            }
        }
    }
    let allowed = |col: usize| !is_artificial(col);
    match run_phase(
        &mut tab,
        &mut cost,
        &mut basis,
        &allowed,
        max_pivots,
        &mut pivots_used,
    ) {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded => {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded, n));
        }
        PhaseOutcome::CapHit => {
            return Ok(LpSolution::non_optimal(LpStatus::NumericalFailure, n));
        }
    }

    // Recover the original variables.
    let mut y = vec![0.0; total_cols];
    for (i, &b) in basis.iter().enumerate() {
        y[b] = tab[i][total_cols];
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lower } => lower + y[col],
            VarMap::Mirror { col, upper } => upper - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();

    // Verification gate, relative to row scale.
    let x_scale = x.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
    let row_scale = lp
        .a_eq
        .iter()
        .chain(lp.a_ub.iter())
        .flat_map(|r| r.iter())
        .fold(1.0f64, |m, &v| m.max(v.abs()));
    if lp.feasibility_violation(&x) > feas_tol * row_scale * x_scale * 16.0 {
        return Ok(LpSolution::non_optimal(LpStatus::NumericalFailure, n));
    }

    let objective_value = linalg::dot(&lp.objective, &x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
    })
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    CapHit,
}

fn run_phase(
    tab: &mut [Vec<f64>],
    cost: &mut [f64],
    basis: &mut [usize],
    allowed: &dyn Fn(usize) -> bool,
    max_pivots: usize,
    pivots_used: &mut usize,
) -> PhaseOutcome {
    let n_rows = tab.len();
    let total_cols = cost.len() - 1;
    let mut degenerate_run = 0usize;
    loop {
        if *pivots_used >= max_pivots {
            return PhaseOutcome::CapHit;
        }
        let bland = degenerate_run > DEGENERATE_PIVOT_CAP;
        let entering = if bland {
            (0..total_cols).find(|&c| allowed(c) && cost[c] < -1e-12)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for c in 0..total_cols {
                if allowed(c) && cost[c] < -OPT_TOL {
                    match best {
                        Some((_, v)) if cost[c] >= v => {}
                        _ => best = Some((c, cost[c])),
                    }
                }
            }
            best.map(|(c, _)| c)
        };
        let Some(col) = entering else {
            return PhaseOutcome::Optimal;
        };

        // Ratio test; ties go to the lowest basis index (Bland-safe).
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..n_rows {
            let a = tab[r][col];
            if a > PIVOT_TOL {
                let ratio = (tab[r][total_cols] / a).max(0.0);
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - 1e-12 || (ratio < lratio + 1e-12 && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            return PhaseOutcome::Unbounded;
        };
        if ratio <= 1e-12 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(tab, cost, basis, row, col);
        *pivots_used += 1;
    }
}

fn pivot(tab: &mut [Vec<f64>], cost: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let total = tab[row].len() - 1;
    let p = tab[row][col];
    for c in 0..=total {
        tab[row][c] /= p;
    }
    tab[row][col] = 1.0; // exact after normalization
    for r in 0..tab.len() {
        if r == row {
            continue;
        }
        let f = tab[r][col];
        if f != 0.0 {
            for c in 0..=total {
                tab[r][c] -= f * tab[row][c];
            }
            tab[r][col] = 0.0;
        }
    }
    let f = cost[col];
    if f != 0.0 {
        for c in 0..=total {
            cost[c] -= f * tab[row][c];
        }
        cost[col] = 0.0;
    }
    basis[row] = col;
}

/// Exact optimum of a small LP by enumerating active-set vertices.
///
/// Missing bounds are replaced by a `±1e9` stand-in box; an optimum resting
/// on a stand-in facet is reported as unbounded. Used only as a test oracle.
pub fn brute_force_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.n_vars();
    let n_cons = lp.a_eq.len() + lp.a_ub.len();
    if n > 6 || n_cons > 20 {
        return Err(LpError::OracleSizeCap {
            max_vars: 6,
            max_cons: 20,
            vars: n,
            cons: n_cons,
        });
    }

    // Candidate facets: every inequality row plus every bound facet.
    struct Facet {
        normal: Vec<f64>,
        offset: f64,
        synthetic: bool,
    }
    let mut facets: Vec<Facet> = Vec::new();
    for (row, &b) in lp.a_ub.iter().zip(&lp.b_ub) {
        facets.push(Facet {
            normal: row.clone(),
            offset: b,
            synthetic: false,
        });
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut lo_normal = vec![0.0; n];
        lo_normal[j] = -1.0;
        facets.push(Facet {
            normal: lo_normal,
            offset: if lo.is_finite() {
                -lo
            } else {
                ORACLE_BIG_BOUND
            },
            synthetic: !lo.is_finite(),
        });
        let mut hi_normal = vec![0.0; n];
        hi_normal[j] = 1.0;
        facets.push(Facet {
            normal: hi_normal,
            offset: if hi.is_finite() { hi } else { ORACLE_BIG_BOUND },
            synthetic: !hi.is_finite(),
        });
    }

    let n_eq = lp.a_eq.len();
    if n_eq > n {
        // Over-determined equality system: fall back to a single solve of the
        // first n rows; anything else is out of oracle scope.
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible, n));
    }
    let k = n - n_eq;
    let feas_tol = 1e-7;

    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        // Solve the linear system: equality rows + chosen active facets.
        let mut a_sys: Vec<Vec<f64>> = lp.a_eq.clone();
        let mut b_sys: Vec<f64> = lp.b_eq.clone();
        for &f in &combo {
            a_sys.push(facets[f].normal.clone());
            b_sys.push(facets[f].offset);
        }
        if let Some(x) = linalg::solve_dense(&a_sys, &b_sys) {
            let violation = {
                let mut worst: f64 = 0.0;
                for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
                    worst = worst.max((linalg::dot(row, &x) - b).abs());
                }
                for f in &facets {
                    worst = worst.max(linalg::dot(&f.normal, &x) - f.offset);
                }
                worst
            };
            let scale = x.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
            if violation <= feas_tol * scale {
                let obj = linalg::dot(&lp.objective, &x);
                let on_synthetic = combo.iter().any(|&f| {
                    facets[f].synthetic
                        && (linalg::dot(&facets[f].normal, &x) - facets[f].offset).abs()
                            <= feas_tol * scale
                });
                let better = match &best {
                    None => true,
                    Some((bobj, _, _)) => obj < *bobj - 1e-12,
                };
                if better {
                    best = Some((obj, x, on_synthetic));
                }
            }
        }

        // Next k-combination of facet indices.
        if k == 0 {
            break;
        }
        let mut i = k;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if combo[i] < facets.len() - (k - i) {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                combo.clear();
                break;
            }
        }
        if combo.is_empty() {
            break;
        }
    }

    match best {
        Some((obj, x, on_synthetic)) => {
            if on_synthetic {
                Ok(LpSolution::non_optimal(LpStatus::Unbounded, n))
            } else {
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    x,
                    objective_value: obj,
                })
            }
        }
        None => Ok(LpSolution::non_optimal(LpStatus::Infeasible, n)),
    }
}
