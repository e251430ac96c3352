//! Two-sided Gaussian envelopes for the empirical heat kernel.
//!
//! For a cell with centre `y` and an estimate `p̂` of `p_t(x, ·)`, the
//! normalized ratio is `r = p̂ · V(x, √t)` and the scaled distance is
//! `s = |x − y|² / t`. The fit looks for
//! `c₁ e^{−c₂ s} ≤ r ≤ c₃ e^{−c₄ s}` on every admissible cell.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ball_volume, ConvexDomain};
use crate::mesh::TriMesh;
use crate::stochastic::rng::sub_seed;
use crate::stochastic::{estimate_heat_kernel, HeatKernelEstimate, MIN_CELL_COUNT};
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSample {
    pub s: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianBoundFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub violation_count: usize,
    pub cells_used: usize,
    pub combinations: usize,
}

/// Search range for the decay rates.
const RATE_LO: f64 = 1e-4;
const RATE_HI: f64 = 1e2;

/// Minimizer of a convex function on `[RATE_LO, RATE_HI]`.
fn argmin_convex(f: impl Fn(f64) -> f64) -> f64 {
    let (mut a, mut b) = (RATE_LO, RATE_HI);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    0.5 * (a + b)
}

/// Samples from one kernel estimate; cells below [`MIN_CELL_COUNT`] are skipped.
pub fn kernel_samples(domain: &ConvexDomain<f64>, k: &HeatKernelEstimate) -> Result<Vec<GaussianSample>> {
    let v = ball_volume(domain, k.source, k.time.sqrt())?;
    Ok(k.counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= MIN_CELL_COUNT)
        .map(|(i, _)| GaussianSample { s: k.source.dist(k.cell_centers[i]).powi(2) / k.time, ratio: k.density[i] * v })
        .collect())
}

/// In the `(s, log r)` plane each envelope is a supporting line of the
/// samples. For a rate `b` the least admissible upper prefactor is
/// `max r e^{b s}` and the largest lower one `min r e^{b s}`; the chosen rate
/// minimizes the mean log-gap between line and samples over `[0, s_max]`.
/// Afterwards `c₄ ≤ c₂` and `c₁ ≤ c₃` are enforced by lowering `c₄` and `c₁`.
pub fn fit_envelopes(samples: &[GaussianSample]) -> Result<GaussianBoundFit> {
    if samples.is_empty() {
        return Err(Error::InsufficientCounts { min_count: MIN_CELL_COUNT as usize, n_paths: 0 });
    }
    if samples.iter().any(|g| !(g.ratio > 0.0 && g.ratio.is_finite() && g.s >= 0.0)) {
        return Err(invalid("samples", "ratios must be positive and finite"));
    }
    let log_upper = |b: f64| samples.iter().map(|g| g.ratio.ln() + b * g.s).fold(f64::NEG_INFINITY, f64::max);
    let log_lower = |b: f64| samples.iter().map(|g| g.ratio.ln() + b * g.s).fold(f64::INFINITY, f64::min);
    let half = 0.5 * samples.iter().map(|g| g.s).fold(0.0, f64::max);
    let upper_gap = |b: f64| log_upper(b) - b * half;
    let lower_gap = |b: f64| log_lower(b) - b * half;
    // Both gaps are convex in the rate: a max (min) of affine functions minus an affine one.
    let c4 = argmin_convex(upper_gap);
    let c2 = argmin_convex(|b| -lower_gap(b));
    let c4 = c4.min(c2);
    let c3 = log_upper(c4).exp();
    let c1 = log_lower(c2).exp().min(c3);
    let slack = 1e-9;
    let violation_count = samples
        .iter()
        .filter(|g| {
            c1 * (-c2 * g.s).exp() > g.ratio * (1.0 + slack) || c3 * (-c4 * g.s).exp() < g.ratio * (1.0 - slack)
        })
        .count();
    Ok(GaussianBoundFit { c1, c2, c3, c4, violation_count, cells_used: samples.len(), combinations: 0 })
}

/// Estimates the kernel for every `(source, time)` on the cells of `mesh`
/// and fits one set of constants to all of them. Source `k` uses
/// `sub_seed(seed, k)`; the times of one source share paths.
#[allow(clippy::too_many_arguments)]
pub fn fit_gaussian_bounds(
    domain: &ConvexDomain<f64>,
    mesh: &TriMesh<f64>,
    sources: &[Point],
    times: &[f64],
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<GaussianBoundFit> {
    if sources.len() < 2 || times.len() < 2 {
        return Err(invalid("sources", "need at least two sources and two times"));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut samples = Vec::new();
    for (k, &x) in sources.iter().enumerate() {
        for est in estimate_heat_kernel(domain, mesh, x, &sorted, n_paths, dt, sub_seed(seed, k as u64))? {
            samples.extend(kernel_samples(domain, &est)?);
        }
    }
    let mut fit = fit_envelopes(&samples)?;
    fit.combinations = sources.len() * times.len();
    Ok(fit)
}
