//! The two nonsmooth parts `G` used by the benchmark protocol.
//!
//! Case i: every `g_i` is the indicator of the problem box — evaluating to 0
//! inside (with a small membership slack for rounding drift of convex
//! combinations) and `+∞` outside.
//!
//! Case ii: `g_i(x) = max{⟨x, z⟩ : −δe ⪯ B_i z ⪯ δe}` is the support
//! function of a polytope, evaluated by solving the underlying LP.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, DEFAULT_FEAS_TOL};
use crate::problems::BoxBounds;

/// Membership slack for the indicator: iterates are convex combinations of
/// box points and may drift by rounding.
pub const INDICATOR_SLACK: f64 = 1e-12;

/// Condition-estimate ceiling beyond which a sampled `B_i` is regenerated.
pub const CONDITION_LIMIT: f64 = 1e8;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("objective index {index} out of range for m = {m}")]
    BadIndex { index: usize, m: usize },
    #[error("support-function LP failed: {0:?}")]
    SupportLpFailed(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("could not sample a well-conditioned matrix in {0} attempts")]
    SamplingExhausted(usize),
}

/// Case i: `g_i` is the indicator of the box `Ω` for every objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicatorModel {
    pub domain: BoxBounds,
}

/// Case ii: per-objective polytope support functions with a shared level δ.
///
/// The polytope is `Z_i = {z : −δe ⪯ B_i z ⪯ δe}` with stacked constraint
/// matrix `C_i = [B_i; −B_i]` and right-hand side `b_i = δe`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportFunctionModel {
    /// One nonsingular `n×n` matrix per objective.
    pub b_mats: Vec<Vec<Vec<f64>>>,
    pub delta: f64,
    pub domain: BoxBounds,
}

impl SupportFunctionModel {
    pub fn n(&self) -> usize {
        self.domain.dim()
    }

    pub fn m(&self) -> usize {
        self.b_mats.len()
    }

    /// `g_i(x)` via the LP `max ⟨x, z⟩ s.t. C_i z ⪯ b_i`.
    ///
    /// `Z_i` is bounded because `B_i` is nonsingular, so an unbounded LP can
    /// only indicate a broken model and is reported as a hard error.
    pub fn evaluate(&self, i: usize, x: &[f64]) -> Result<f64, ModelError> {
        let n = self.n();
        if i >= self.m() {
            return Err(ModelError::BadIndex {
                index: i,
                m: self.m(),
            });
        }
        let b = &self.b_mats[i];
        let mut lp = LinearProgram::minimize(x.iter().map(|v| -v).collect());
        lp.a_ub = b
            .iter()
            .cloned()
            .chain(b.iter().map(|row| row.iter().map(|v| -v).collect()))
            .collect();
        lp.b_ub = vec![self.delta; 2 * n];
        let sol = solve_lp(&lp, DEFAULT_FEAS_TOL)?;
        match sol.status {
            LpStatus::Optimal => Ok(-sol.objective_value),
            other => Err(ModelError::SupportLpFailed(other)),
        }
    }
}

/// Tagged union over the two cases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum NonsmoothModel {
    Indicator(IndicatorModel),
    Support(SupportFunctionModel),
}

impl NonsmoothModel {
    pub fn indicator(domain: BoxBounds) -> Self {
        NonsmoothModel::Indicator(IndicatorModel { domain })
    }

    /// The compact domain `dom(G)`.
    pub fn domain(&self) -> &BoxBounds {
        match self {
            NonsmoothModel::Indicator(m) => &m.domain,
            NonsmoothModel::Support(m) => &m.domain,
        }
    }

    /// `g_i(x)` as an extended real (`+∞` outside the box in Case i).
    pub fn evaluate_g(&self, i: usize, x: &[f64]) -> Result<f64, ModelError> {
        match self {
            NonsmoothModel::Indicator(m) => {
                if m.domain.contains(x, INDICATOR_SLACK) {
                    Ok(0.0)
                } else {
                    Ok(f64::INFINITY)
                }
            }
            NonsmoothModel::Support(m) => m.evaluate(i, x),
        }
    }

    /// Number of LP solves one full `G` evaluation costs.
    pub fn g_lp_cost(&self) -> usize {
        match self {
            NonsmoothModel::Indicator(_) => 0,
            NonsmoothModel::Support(m) => m.m(),
        }
    }
}

const SAMPLE_ATTEMPTS: usize = 100;

/// Samples a Case ii model: entries of each `B_i` i.i.d. uniform on [0, 1],
/// regenerating any draw whose 1-norm condition estimate exceeds
/// [`CONDITION_LIMIT`]; one shared `δ` uniform on [0.01, 0.1].
/// Deterministic per seed.
pub fn sample_support_model(
    n: usize,
    m: usize,
    domain: BoxBounds,
    seed: u64,
) -> Result<SupportFunctionModel, ModelError> {
    assert!(n >= 1 && m >= 1);
    assert_eq!(domain.dim(), n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b_mats = Vec::with_capacity(m);
    for _ in 0..m {
        let mut ok = None;
        for _ in 0..SAMPLE_ATTEMPTS {
            let cand: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
                .collect();
            if linalg::condition_estimate(&cand) <= CONDITION_LIMIT {
                ok = Some(cand);
                break;
            }
        }
        b_mats.push(ok.ok_or(ModelError::SamplingExhausted(SAMPLE_ATTEMPTS))?);
    }
    let delta = 0.01 + 0.09 * rng.gen::<f64>();
    Ok(SupportFunctionModel {
        b_mats,
        delta,
        domain,
    })
}
