//! Hot-spot localization near the diameter tips.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::report::{LemmaId, Relation, VerificationReport};
use super::solve::SolvedDomain;
use crate::error::Result;
use crate::geometry::{all_diameter_pairs, inradius_incenter, DiameterPair, DomainSpec};
use crate::spectral::hot_spots;
use crate::Point;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MainTheoremOptions {
    /// Relative band defining the global extremum sets.
    pub band_epsilon: f64,
    /// Vertex pairs within this relative tolerance of the diameter count as diameter pairs.
    pub pair_rel_tol: f64,
    pub c_max: f64,
}

impl Default for MainTheoremOptions {
    fn default() -> Self {
        Self { band_epsilon: 1e-3, pair_rel_tol: 1e-6, c_max: 10.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MainTheoremFit {
    /// Max over band points of the distance to the nearer tip, over inradius,
    /// for the most favourable diameter pair.
    pub c_best: f64,
    /// Same for the least favourable pair.
    pub c_worst: f64,
    /// Same quantities using only the representative extremum of each component.
    pub c_best_representatives: f64,
    pub c_worst_representatives: f64,
    /// Distance from the representative maximum to the nearer tip of the pair
    /// most orthogonal to the axis from the minimum to the maximum, over inradius.
    pub c_orthogonal_pair: f64,
    pub best_pair: DiameterPair<f64>,
    pub worst_pair: DiameterPair<f64>,
    pub n_pairs: usize,
    pub n_band_points: usize,
    pub inradius: f64,
}

fn ratio(points: &[Point], p: &DiameterPair<f64>, inrad: f64) -> f64 {
    points
        .iter()
        .map(|&q| q.dist(p.a).min(q.dist(p.b)))
        .fold(0.0, f64::max)
        / inrad
}

pub fn main_theorem_fit(s: &SolvedDomain, opts: &MainTheoremOptions) -> Result<MainTheoremFit> {
    let hs = hot_spots(&s.pair, &s.mesh, opts.band_epsilon)?;
    let set = all_diameter_pairs(&s.domain, opts.pair_rel_tol)?;
    let (inrad, _) = inradius_incenter(&s.domain)?;
    let band: Vec<Point> = hs.max_band_points.iter().chain(&hs.min_band_points).copied().collect();
    let reps: Vec<Point> = hs.maxima.iter().chain(&hs.minima).map(|e| e.point).collect();
    let scored: Vec<(f64, f64)> = set.pairs.iter().map(|p| (ratio(&band, p, inrad), ratio(&reps, p, inrad))).collect();
    let best = (0..scored.len()).min_by(|&i, &j| scored[i].0.total_cmp(&scored[j].0)).unwrap();
    let worst = (0..scored.len()).max_by(|&i, &j| scored[i].0.total_cmp(&scored[j].0)).unwrap();
    let xmax = hs.maxima[0].point;
    let axis = xmax - hs.minima[0].point;
    let axis = axis * (1.0 / axis.norm());
    let orth = set
        .pairs
        .iter()
        .min_by(|p, q| {
            let cp = ((p.b - p.a).dot(axis) / p.distance).abs();
            let cq = ((q.b - q.a).dot(axis) / q.distance).abs();
            cp.total_cmp(&cq)
        })
        .unwrap();
    Ok(MainTheoremFit {
        c_best: scored[best].0,
        c_worst: scored[worst].0,
        c_best_representatives: scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min),
        c_worst_representatives: scored.iter().map(|s| s.1).fold(0.0, f64::max),
        c_orthogonal_pair: xmax.dist(orth.a).min(xmax.dist(orth.b)) / inrad,
        best_pair: set.pairs[best],
        worst_pair: set.pairs[worst],
        n_pairs: set.pairs.len(),
        n_band_points: band.len(),
        inradius: inrad,
    })
}

pub fn verify_main_theorem(spec: &DomainSpec, s: &SolvedDomain, opts: &MainTheoremOptions) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let fit = main_theorem_fit(s, opts)?;
    let mut r = VerificationReport::new(LemmaId::MainTheorem, spec.label(), serde_json::to_value(spec)?, spec.seed);
    r.require("c_best", fit.c_best, Relation::Le, "c_max", opts.c_max)
        .constant("c_worst", fit.c_worst)
        .constant("c_best_representatives", fit.c_best_representatives)
        .constant("c_worst_representatives", fit.c_worst_representatives)
        .constant("c_orthogonal_pair", fit.c_orthogonal_pair)
        .constant("n_diameter_pairs", fit.n_pairs as f64)
        .constant("aspect_N", s.normalization.aspect_n)
        .constant("mu1", s.pair.mu1)
        .tolerance("band_epsilon", opts.band_epsilon)
        .tolerance("pair_rel_tol", opts.pair_rel_tol)
        .tolerance("h", s.mesh.target_h());
    if s.pair.multiplicity_flag {
        r.note("near-degenerate first eigenvalue; checks use the returned representative eigenvector");
    }
    if s.normalization.aspect_n < 4.0 {
        r.note("outside elongated regime (aspect_N < 4)");
    }
    Ok(r.finish(t0))
}
