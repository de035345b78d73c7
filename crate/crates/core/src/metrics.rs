//! Pareto front quality metrics — Purity and the Γ/Δ spread measures — plus
//! performance-profile step data for cross-solver comparisons.
//!
//! A solver's front is the set of objective vectors of its converged runs,
//! deduplicated at `1e-8` and reduced to its nondominated subset. Purity is
//! judged against the nondominated filter of the union of all solvers'
//! fronts; Δ uses per-objective extreme values from that same combined
//! reference so the numbers are comparable across solvers.

use serde::{Deserialize, Serialize};

/// Tolerance for treating two objective vectors as the same point.
pub const POINT_MATCH_TOL: f64 = 1e-8;

/// `u` dominates `v` iff `u ⪯ v` componentwise and `u ≠ v`.
pub fn dominates(u: &[f64], v: &[f64]) -> bool {
    debug_assert_eq!(u.len(), v.len());
    let mut strict = false;
    for (&a, &b) in u.iter().zip(v) {
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

fn same_point(u: &[f64], v: &[f64]) -> bool {
    u.iter()
        .zip(v)
        .all(|(&a, &b)| (a - b).abs() <= POINT_MATCH_TOL)
}

/// Retains exactly the points not dominated by any other input point.
pub fn nondominated_filter(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .filter(|cand| !points.iter().any(|other| dominates(other, cand)))
        .cloned()
        .collect()
}

/// One solver's front approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontApproximation {
    pub points: Vec<Vec<f64>>,
    pub solver_tag: String,
}

impl FrontApproximation {
    /// Deduplicates the raw outcome vectors at [`POINT_MATCH_TOL`] and keeps
    /// the nondominated subset.
    pub fn from_outcomes(solver_tag: impl Into<String>, raw: &[Vec<f64>]) -> Self {
        let mut dedup: Vec<Vec<f64>> = Vec::new();
        for p in raw {
            if !dedup.iter().any(|q| same_point(p, q)) {
                dedup.push(p.clone());
            }
        }
        FrontApproximation {
            points: nondominated_filter(&dedup),
            solver_tag: solver_tag.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricReport {
    pub purity: f64,
    pub gamma: f64,
    /// Absent when the front has fewer than two points.
    pub delta: Option<f64>,
    pub n_points: usize,
}

/// Fraction of the front's points that appear (within tolerance) in the
/// combined nondominated reference.
pub fn purity(front: &FrontApproximation, reference: &[Vec<f64>]) -> f64 {
    if front.points.is_empty() {
        return if reference.is_empty() { 1.0 } else { 0.0 };
    }
    let hits = front
        .points
        .iter()
        .filter(|p| reference.iter().any(|r| same_point(p, r)))
        .count();
    hits as f64 / front.points.len() as f64
}

/// Γ spread: the largest gap between consecutive sorted coordinates, over
/// all objectives. A singleton front has no gaps and scores 0.
pub fn spread_gamma(front: &FrontApproximation) -> f64 {
    let n = front.points.len();
    assert!(n >= 1, "gamma spread needs at least one point");
    if n == 1 {
        return 0.0;
    }
    let m = front.points[0].len();
    let mut gamma: f64 = 0.0;
    for j in 0..m {
        let mut coords: Vec<f64> = front.points.iter().map(|p| p[j]).collect();
        coords.sort_by(f64::total_cmp);
        for w in coords.windows(2) {
            gamma = gamma.max(w[1] - w[0]);
        }
    }
    gamma
}

/// Δ spread: normalized deviation of consecutive gaps, per objective
///
/// ```text
/// Δ_j = (δ_0 + δ_N + Σ_{i=1}^{N−1} |δ_i − δ̄|) / (δ_0 + δ_N + (N−1)·δ̄)
/// ```
///
/// with `N` points sorted by coordinate `j`, interior gaps `δ_1…δ_{N−1}`,
/// mean interior gap `δ̄`, and `δ_0`/`δ_N` the gaps to the supplied
/// per-objective extremes. `Δ = max_j Δ_j`; a zero denominator (all points
/// and extremes coincide) is guarded to 0. Returns `None` for fewer than
/// two points.
pub fn spread_delta(front: &FrontApproximation, extremes: &[(f64, f64)]) -> Option<f64> {
    let n = front.points.len();
    if n < 2 {
        return None;
    }
    let m = front.points[0].len();
    debug_assert_eq!(extremes.len(), m);
    let mut delta: f64 = 0.0;
    for j in 0..m {
        let mut coords: Vec<f64> = front.points.iter().map(|p| p[j]).collect();
        coords.sort_by(f64::total_cmp);
        let (lo, hi) = extremes[j];
        let d0 = (coords[0] - lo).max(0.0);
        let dn = (hi - coords[n - 1]).max(0.0);
        let interior: Vec<f64> = coords.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        let deviation: f64 = interior.iter().map(|d| (d - mean).abs()).sum();
        let denom = d0 + dn + (n - 1) as f64 * mean;
        if denom > 0.0 {
            delta = delta.max((d0 + dn + deviation) / denom);
        }
    }
    Some(delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub tau: f64,
    pub rho: f64,
}

/// Performance profiles from a solvers × problems cost matrix.
///
/// Costs are nonnegative; `None` marks a failed/absent entry. Ratios are
/// taken against the per-problem best; columns nobody solved are dropped
/// with a warning. The output per solver is the sorted breakpoint list of
/// the step function `ρ_s(τ) = |{p : r_{s,p} ≤ τ}| / #problems`.
pub fn performance_profile(costs: &[Vec<Option<f64>>]) -> Vec<Vec<ProfilePoint>> {
    let n_solvers = costs.len();
    if n_solvers == 0 {
        return Vec::new();
    }
    let n_problems = costs[0].len();
    debug_assert!(costs.iter().all(|row| row.len() == n_problems));

    let mut kept_columns = Vec::new();
    for p in 0..n_problems {
        let best = costs
            .iter()
            .filter_map(|row| row[p])
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            kept_columns.push((p, best));
        } else {
            log::warn!("performance profile: dropping problem column {p}: no solver has a cost");
        }
    }
    let denom = kept_columns.len() as f64;

    (0..n_solvers)
        .map(|s| {
            let mut ratios: Vec<f64> = kept_columns
                .iter()
                .filter_map(|&(p, best)| {
                    let cost = costs[s][p]?;
                    Some(if best == 0.0 {
                        if cost == 0.0 {
                            1.0
                        } else {
                            return None; // infinitely worse than a zero-cost best
                        }
                    } else {
                        cost / best
                    })
                })
                .collect();
            ratios.sort_by(f64::total_cmp);
            let mut steps: Vec<ProfilePoint> = Vec::new();
            if denom == 0.0 {
                return steps;
            }
            for (i, &tau) in ratios.iter().enumerate() {
                let rho = (i + 1) as f64 / denom;
                match steps.last_mut() {
                    Some(last) if last.tau == tau => last.rho = rho,
                    _ => steps.push(ProfilePoint { tau, rho }),
                }
            }
            steps
        })
        .collect()
}
