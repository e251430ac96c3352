//! Report wrappers around the stochastic and clustering checks.

use std::time::Instant;

use super::gaussian::GaussianBoundFit;
use super::report::{LemmaId, Relation, VerificationReport};
use super::solve::SolvedDomain;
use crate::error::Result;
use crate::geometry::{verify_diameter_clustering, ConvexDomain, DomainSpec};
use crate::mesh::TriMesh;
use crate::stochastic::{hitting_time_experiment, verify_kernel_domination, HittingConfig};
use crate::Point;

/// Near-diameter endpoints form two clusters of radius `≤ c_max · inrad`.
pub fn verify_lemma1(spec: &DomainSpec, d: &ConvexDomain<f64>, rel_tol: f64, c_max: f64) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let c = verify_diameter_clustering(d, rel_tol, c_max)?;
    let mut r = VerificationReport::new(LemmaId::Lemma1, spec.label(), serde_json::to_value(spec)?, spec.seed);
    r.require("cluster_radius_over_inrad", c.c_estimate, Relation::Le, "c_max", c_max)
        .constant("n_pairs", c.n_pairs as f64)
        .constant("diam_over_inrad", c.aspect)
        .tolerance("rel_tol", rel_tol);
    Ok(r.finish(t0))
}

/// Short-time kernel dominated by the unit-time kernel: the constant is positive and finite.
#[allow(clippy::too_many_arguments)]
pub fn verify_lemma3(
    spec: &DomainSpec,
    d: &ConvexDomain<f64>,
    mesh: &TriMesh<f64>,
    x: Point,
    y: Point,
    delta: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let k = verify_kernel_domination(d, mesh, x, y, delta, 1.0, n_paths, dt, seed)?;
    let mut r = VerificationReport::new(LemmaId::Lemma3, spec.label(), serde_json::to_value(spec)?, seed);
    r.require("c_delta_hat", k.c_delta_hat, Relation::Gt, "zero", 0.0)
        .require("c_delta_hat_cap", k.c_delta_hat, Relation::Lt, "infinity", f64::MAX)
        .constant("cells_used", k.cells_used as f64)
        .tolerance("delta", delta)
        .tolerance("dt", dt)
        .tolerance("n_paths", n_paths as f64);
    Ok(r.finish(t0))
}

/// Two-sided Gaussian envelopes: positive finite constants with no violated cell.
pub fn theorem1_report(spec: &DomainSpec, fit: &GaussianBoundFit, seed: u64) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let mut r = VerificationReport::new(LemmaId::Theorem1Bounds, spec.label(), serde_json::to_value(spec)?, seed);
    r.tolerance("zero", 0.0).tolerance("infinity", f64::MAX);
    for (k, v) in [("c1", fit.c1), ("c2", fit.c2), ("c3", fit.c3), ("c4", fit.c4)] {
        r.require(k, v, Relation::Gt, "zero", 0.0);
        r.checks.push(super::report::Check::new(k, Relation::Lt, "infinity"));
    }
    r.require("violations", fit.violation_count as f64, Relation::Le, "max_violations", 0.0)
        .constant("cells_used", fit.cells_used as f64)
        .constant("combinations", fit.combinations as f64);
    Ok(r.finish(t0))
}

/// Hitting-time mechanics: `P(B) ≤ p_b_max` and `E(e^{μT} 1_A) > 1`.
pub fn verify_hitting_time(spec: &DomainSpec, s: &SolvedDomain, cfg: &HittingConfig, p_b_max: f64) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let h = hitting_time_experiment(&s.domain, &s.mesh, &s.pair, cfg)?;
    let mut r = VerificationReport::new(LemmaId::HittingTime, spec.label(), serde_json::to_value(spec)?, cfg.seed);
    r.require("p_b", h.p_b, Relation::Le, "p_b_max", p_b_max)
        .require("exp_weighted", h.exp_weighted, Relation::Gt, "one", 1.0)
        .constant("exp_weighted_stderr", h.exp_weighted_stderr)
        .constant("exp_functional", h.exp_functional)
        .constant("hit_fraction", h.hit_fraction)
        .constant("median_t", h.median_t)
        .constant("barrier_x", h.barrier_x)
        .constant("mu1", h.mu1_used)
        .tolerance("offset_c2", cfg.offset_c2)
        .tolerance("t_budget", cfg.t_budget)
        .tolerance("dt", cfg.dt);
    Ok(r.finish(t0))
}
