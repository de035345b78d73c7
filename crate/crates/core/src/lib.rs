//! Conditional gradient (Frank–Wolfe type) methods for multiobjective
//! composite optimization `min F(x) = G(x) + H(x)`, where each smooth
//! component has a Hölder-continuous gradient and each `g_i` is either the
//! indicator of a box or a polytope support function.
//!
//! The crate provides:
//!
//! - [`solvers`]: the parameter-dependent method (`run_pgm`, closed-form step
//!   size from the Hölder data) and the parameter-free method (`run_fgm`,
//!   adaptive doubling line search), both fully instrumented;
//! - [`gap`]: the LP-based oracle for the gap function `θ(x)` and its
//!   linearized minimizer `s(x)`, plus a grid brute-force oracle for tests;
//! - [`lp`]: a dense, deterministic two-phase simplex solver and a
//!   vertex-enumeration oracle;
//! - [`problems`]: the benchmark problem suite (smooth parts, analytic
//!   Jacobians, boxes, Hölder registry, sampling-based Hölder estimator);
//! - [`models`]: the two nonsmooth parts (box indicator, per-objective
//!   polytope support function);
//! - [`theory`]: calculators for the convergence-rate quantities and
//!   replay-style checks of the descent/rate inequalities on recorded runs;
//! - [`metrics`]: Pareto front quality metrics (Purity, Γ/Δ spread) and
//!   performance-profile data;
//! - [`bench`]: the seeded multi-start experiment harness used by the CLI.

pub mod bench;
pub mod gap;
mod linalg;
pub mod lp;
pub mod metrics;
pub mod models;
pub mod problems;
pub mod solvers;
pub mod theory;
