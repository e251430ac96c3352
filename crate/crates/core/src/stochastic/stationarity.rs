//! Chi-square test of the long-time endpoint law against the uniform law.
//!
//! A Gaussian step followed by specular reflection is a billiard flow run
//! for a random time in a random isotropic direction, which preserves the
//! uniform law on the domain for every step size. The long runs therefore use
//! a coarse step (`STATIONARITY_DT_OVER_INRADIUS2 · inradius²`).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::paths::run_snapshots;
use crate::error::{invalid, Result};
use crate::geometry::{inradius_incenter, ConvexDomain};
use crate::Point;

pub const STATIONARITY_DT_OVER_INRADIUS2: f64 = 0.2;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StationarityReport {
    pub t: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub n_cells: usize,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
    /// Steps that exhausted the reflection budget and used the projection fallback.
    pub fallbacks: u64,
    pub reflections: u64,
}

/// Clip a convex polygon to `{p : a·p ≤ b}`.
fn clip(poly: &[Point], a: Point, b: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (fp, fq) = (a.dot(p) - b, a.dot(q) - b);
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            out.push(p.lerp(q, fp / (fp - fq)));
        }
    }
    out
}

fn area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

/// Cells: `n_strips` vertical strips of equal area, each halved by a
/// horizontal cut, so all `2·n_strips` cells have the same area.
struct Cells {
    cuts: Vec<f64>,
    y_split: Vec<f64>,
    area: Vec<f64>,
}

/// Abscissa (or ordinate, with `dir = (0, 1)`) where the area of
/// `{dir·p ≤ c}` reaches `target`.
fn area_cut(poly: &[Point], dir: Point, lo: f64, hi: f64, target: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if area(&clip(poly, dir, m)) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

impl Cells {
    fn new(domain: &ConvexDomain<f64>, n_strips: usize) -> Self {
        let v = domain.vertices().to_vec();
        let (lo, hi) = domain.bbox();
        let total = domain.area();
        let ex = Point::new(1.0, 0.0);
        let cuts: Vec<f64> =
            (1..n_strips).map(|k| area_cut(&v, ex, lo.x, hi.x, total * k as f64 / n_strips as f64)).collect();
        let mut y_split = Vec::with_capacity(n_strips);
        let mut area_v = Vec::with_capacity(2 * n_strips);
        for s in 0..n_strips {
            let mut strip = v.clone();
            if s > 0 {
                strip = clip(&strip, Point::new(-1.0, 0.0), -cuts[s - 1]);
            }
            if s + 1 < n_strips {
                strip = clip(&strip, ex, cuts[s]);
            }
            let whole = area(&strip);
            let y = area_cut(&strip, Point::new(0.0, 1.0), lo.y, hi.y, 0.5 * whole);
            let below = area(&clip(&strip, Point::new(0.0, 1.0), y));
            y_split.push(y);
            area_v.push(below);
            area_v.push(whole - below);
        }
        Self { cuts, y_split, area: area_v }
    }

    fn index(&self, p: Point) -> usize {
        let s = self.cuts.partition_point(|&c| c < p.x);
        2 * s + usize::from(p.y > self.y_split[s])
    }
}

/// Runs `n_paths` from `start` to time `t` and tests the endpoints against
/// the uniform law with `2·n_strips` cells of known area.
pub fn stationarity_test(
    domain: &ConvexDomain<f64>,
    start: Option<Point>,
    t: f64,
    n_paths: usize,
    n_strips: usize,
    alpha: f64,
    seed: u64,
) -> Result<StationarityReport> {
    stationarity_test_with_dt(domain, start, t, STATIONARITY_DT_OVER_INRADIUS2, n_paths, n_strips, alpha, seed)
}

/// [`stationarity_test`] with the step given as a multiple of the squared inradius.
#[allow(clippy::too_many_arguments)]
pub fn stationarity_test_with_dt(
    domain: &ConvexDomain<f64>,
    start: Option<Point>,
    t: f64,
    dt_over_inradius2: f64,
    n_paths: usize,
    n_strips: usize,
    alpha: f64,
    seed: u64,
) -> Result<StationarityReport> {
    if n_strips == 0 {
        return Err(invalid("n_strips", "must be positive"));
    }
    let (r, inc) = inradius_incenter(domain)?;
    let dt = dt_over_inradius2 * r * r;
    let ens = run_snapshots(domain, start.unwrap_or(inc), &[t], dt, n_paths, seed)?.remove(0);
    let cells = Cells::new(domain, n_strips);
    let mut observed = vec![0u64; cells.area.len()];
    for &p in &ens.endpoints {
        observed[cells.index(p)] += 1;
    }
    let total: f64 = cells.area.iter().sum();
    let expected: Vec<f64> = cells.area.iter().map(|a| a / total * n_paths as f64).collect();
    if expected.iter().any(|&e| e < 5.0) {
        return Err(invalid("n_paths", "fewer than 5 expected endpoints in some cell"));
    }
    let chi2: f64 = observed.iter().zip(&expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
    let dof = observed.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(chi2)).unwrap_or(f64::NAN);
    Ok(StationarityReport {
        t,
        dt,
        n_paths,
        seed,
        n_cells: observed.len(),
        observed,
        expected,
        chi2,
        dof,
        p_value,
        alpha,
        pass: p_value >= alpha,
        fallbacks: ens.fallbacks,
        reflections: ens.reflections,
    })
}
