//! Hitting time of a vertical fiber by reflected Brownian motion.
//!
//! A path starts on the fiber `x = x_* + c₂` and runs until it first reaches
//! `x ≤ x_*` or the time budget runs out. Event `A` is a hit within the
//! budget, `B` its complement.

use serde::{Deserialize, Serialize};

use super::paths::{check_dt, check_start, Stepper};
use super::reflect::StepEvents;
use super::rng::path_rng;
use crate::error::{invalid, Error, Result};
use crate::geometry::ConvexDomain;
use crate::mesh::TriMesh;
use crate::spectral::{hot_spots, EigenPair, DEFAULT_BAND_EPSILON};
use crate::Point;
use rayon::prelude::*;

/// Where the barrier fiber sits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "x")]
pub enum Barrier {
    /// Through the representative global maximum of the eigenfunction.
    HotSpot,
    /// At a fixed abscissa.
    At(f64),
    /// The given distance to the left of the maximum's fiber.
    LeftOfHotSpot(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HittingConfig {
    pub barrier: Barrier,
    pub offset_c2: f64,
    /// Start height; the midpoint of the start fiber when absent.
    pub start_y: Option<f64>,
    pub t_budget: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HittingTimeStats {
    pub barrier_x: f64,
    pub offset_c2: f64,
    pub start: Point,
    pub t_budget: f64,
    pub mu1_used: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// `P(A)`.
    pub hit_fraction: f64,
    /// `P(B) = 1 − P(A)`.
    pub p_b: f64,
    /// `E(e^{μ T} 1_A)`.
    pub exp_weighted: f64,
    pub exp_weighted_stderr: f64,
    /// `E(e^{μ T} | A)`.
    pub exp_functional: f64,
    /// 5, 25, 50, 75, 95 % quantiles of `T` over hitting paths.
    pub quantiles: [f64; 5],
    /// Median of `T` over all paths, unhit ones counted as `+∞`; NaN when
    /// fewer than half the paths hit.
    pub median_t: f64,
    pub mean_t: f64,
    pub min_t: f64,
}

/// Vertical extent of the domain at abscissa `x`.
pub fn fiber(domain: &ConvexDomain<f64>, x: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in domain.edges() {
        let (l, r) = if a.x <= b.x { (a, b) } else { (b, a) };
        if x < l.x || x > r.x {
            continue;
        }
        let y = if r.x > l.x { l.y + (r.y - l.y) * (x - l.x) / (r.x - l.x) } else { l.y };
        let y2 = if r.x > l.x { y } else { r.y };
        lo = lo.min(y.min(y2));
        hi = hi.max(y.max(y2));
    }
    (lo <= hi).then_some((lo, hi))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// Hitting times of `{x ≤ barrier_x}` from `start`. The crossing time inside
/// a step is interpolated linearly in the abscissa.
#[allow(clippy::too_many_arguments)]
pub fn hitting_times(
    domain: &ConvexDomain<f64>,
    barrier_x: f64,
    start: Point,
    mu1: f64,
    t_budget: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<HittingTimeStats> {
    check_dt(domain, dt)?;
    check_start(domain, start)?;
    if n_paths < 2 {
        return Err(invalid("n_paths", "need at least two paths"));
    }
    if !(t_budget > 0.0 && t_budget.is_finite()) {
        return Err(invalid("t_budget", "must be positive and finite"));
    }
    let stepper = Stepper::new(domain, dt)?;
    let (n_full, rem) = stepper.schedule(t_budget);
    let times: Vec<Option<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            if start.x <= barrier_x {
                return Some(0.0);
            }
            let mut rng = path_rng(seed, i as u64);
            let mut ev = StepEvents::default();
            let mut x = start;
            let mut t = 0.0;
            let last = n_full + u64::from(rem > 0.0);
            for k in 0..last {
                let h = if k < n_full { dt } else { rem };
                let y = stepper.step(x, h, &mut rng, &mut ev);
                if y.x <= barrier_x {
                    let frac = ((x.x - barrier_x) / (x.x - y.x)).clamp(0.0, 1.0);
                    return Some(t + frac * h);
                }
                x = y;
                t = if k + 1 < n_full { (k + 1) as f64 * dt } else { t + h };
            }
            None
        })
        .collect();
    let n = n_paths as f64;
    let mut hits: Vec<f64> = times.iter().flatten().copied().collect();
    hits.sort_by(f64::total_cmp);
    let w: Vec<f64> = times.iter().map(|t| t.map_or(0.0, |t| (mu1 * t).exp())).collect();
    let exp_weighted = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - exp_weighted).powi(2)).sum::<f64>() / (n - 1.0);
    let hit_fraction = hits.len() as f64 / n;
    Ok(HittingTimeStats {
        barrier_x,
        offset_c2: start.x - barrier_x,
        start,
        t_budget,
        mu1_used: mu1,
        n_paths,
        dt,
        seed,
        hit_fraction,
        p_b: 1.0 - hit_fraction,
        exp_weighted,
        exp_weighted_stderr: (var / n).sqrt(),
        exp_functional: if hits.is_empty() { f64::NAN } else { exp_weighted / hit_fraction },
        quantiles: [0.05, 0.25, 0.5, 0.75, 0.95].map(|q| quantile(&hits, q)),
        median_t: if 2 * hits.len() > n_paths {
            let mut all = hits.clone();
            all.resize(n_paths, f64::INFINITY);
            quantile(&all, 0.5)
        } else {
            f64::NAN
        },
        mean_t: if hits.is_empty() { f64::NAN } else { hits.iter().sum::<f64>() / hits.len() as f64 },
        min_t: hits.first().copied().unwrap_or(f64::NAN),
    })
}

/// Runs the experiment with the barrier resolved from the eigenpair.
pub fn hitting_time_experiment(
    domain: &ConvexDomain<f64>,
    mesh: &TriMesh<f64>,
    pair: &EigenPair<f64>,
    cfg: &HittingConfig,
) -> Result<HittingTimeStats> {
    if !(cfg.offset_c2 >= 0.0 && cfg.offset_c2.is_finite()) {
        return Err(invalid("offset_c2", "must be finite and non-negative"));
    }
    let barrier_x = match cfg.barrier {
        Barrier::At(x) => x,
        Barrier::HotSpot | Barrier::LeftOfHotSpot(_) => {
            let hs = hot_spots(pair, mesh, DEFAULT_BAND_EPSILON)?;
            let shift = if let Barrier::LeftOfHotSpot(s) = cfg.barrier { s } else { 0.0 };
            hs.maxima[0].point.x - shift
        }
    };
    let (lo_b, hi_b) = domain.bbox();
    if !(barrier_x > lo_b.x && barrier_x < hi_b.x) {
        return Err(invalid("barrier", format!("x = {barrier_x} outside the domain range ({}, {})", lo_b.x, hi_b.x)));
    }
    let sx = barrier_x + cfg.offset_c2;
    let (lo, hi) = fiber(domain, sx).ok_or(Error::OutsideDomain { x: sx, y: cfg.start_y.unwrap_or(f64::NAN) })?;
    let start = Point::new(sx, cfg.start_y.unwrap_or(0.5 * (lo + hi)));
    hitting_times(domain, barrier_x, start, pair.mu1, cfg.t_budget, cfg.n_paths, cfg.dt, cfg.seed)
}
