//! Reflected Brownian motion by Euler steps with specular reflection.
//!
//! Time follows the heat equation `u_t = Δu` with Neumann data, so that
//! `E φ(X_t) = e^{−μ t} φ(x)` for a Neumann eigenfunction. Each coordinate of
//! an increment over a step `dt` is therefore `N(0, 2 dt)`; with variance
//! `dt` the same identity would hold with `e^{−μ t/2}`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use super::reflect::{EdgeIndex, StepEvents};
use super::rng::path_rng;
use crate::error::{invalid, Error, Result};
use crate::geometry::{inradius_incenter, ConvexDomain};
use crate::{fmt_f64, Point};

/// Largest admissible step relative to the squared inradius.
pub const MAX_DT_OVER_INRADIUS2: f64 = 1e-3;

/// Endpoints of `n_paths` independent paths started at `start`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub start: Point,
    pub t_final: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub rng_seed: u64,
    pub endpoints: Vec<Point>,
    pub reflections: u64,
    pub fallbacks: u64,
}

impl PathEnsemble {
    pub fn write_endpoints_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "path,x,y")?;
        for (i, p) in self.endpoints.iter().enumerate() {
            writeln!(w, "{i},{},{}", fmt_f64(p.x), fmt_f64(p.y))?;
        }
        Ok(())
    }
}

/// One stepping engine shared by the simulation entry points.
#[derive(Clone, Debug)]
pub struct Stepper {
    index: EdgeIndex,
    dt: f64,
    sigma: f64,
}

impl Stepper {
    /// `dt` is not checked against the inradius here; the public entry
    /// points do that.
    pub fn new(domain: &ConvexDomain<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        let sigma = (2.0 * dt).sqrt();
        let index = EdgeIndex::new(domain, 7.0 * sigma)?;
        Ok(Self { index, dt, sigma })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn domain(&self) -> &ConvexDomain<f64> {
        self.index.domain()
    }

    /// Advances by `h ≤ dt` (a full step when `h == dt`).
    #[inline]
    pub fn step(&self, x: Point, h: f64, rng: &mut ChaCha8Rng, ev: &mut StepEvents) -> Point {
        let s = if h == self.dt { self.sigma } else { (2.0 * h).sqrt() };
        let gx: f64 = rng.sample(StandardNormal);
        let gy: f64 = rng.sample(StandardNormal);
        self.index.advance(x, Point::new(x.x + s * gx, x.y + s * gy), ev)
    }

    /// Step sizes that land exactly on `t`.
    pub fn schedule(&self, t: f64) -> (u64, f64) {
        let q = t / self.dt;
        let full = (q + 1e-9).floor();
        let rem = t - full * self.dt;
        if rem > 1e-9 * self.dt {
            (full as u64, rem)
        } else {
            (full as u64, 0.0)
        }
    }

    /// Runs one path from `x` over `[0, t]`.
    pub fn run(&self, mut x: Point, t: f64, rng: &mut ChaCha8Rng, ev: &mut StepEvents) -> Point {
        let (n, rem) = self.schedule(t);
        for _ in 0..n {
            x = self.step(x, self.dt, rng, ev);
        }
        if rem > 0.0 {
            x = self.step(x, rem, rng, ev);
        }
        x
    }
}

pub(crate) fn check_dt(domain: &ConvexDomain<f64>, dt: f64) -> Result<f64> {
    let (r, _) = inradius_incenter(domain)?;
    let cap = MAX_DT_OVER_INRADIUS2 * r * r;
    if !(dt > 0.0) || dt > cap * (1.0 + 1e-12) {
        return Err(invalid(
            "dt",
            format!("must lie in (0, 1e-3·inradius²] = (0, {cap:e}], got {dt:e}"),
        ));
    }
    Ok(r)
}

pub(crate) fn check_start(domain: &ConvexDomain<f64>, start: Point) -> Result<()> {
    if !start.x.is_finite() || !start.y.is_finite() || !domain.contains(start) {
        return Err(Error::OutsideDomain { x: start.x, y: start.y });
    }
    Ok(())
}

/// Endpoints at `t_final`.
pub fn simulate(
    domain: &ConvexDomain<f64>,
    start: Point,
    t_final: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    Ok(simulate_snapshots(domain, start, &[t_final], dt, n_paths, seed)?.remove(0))
}

/// Positions of the same paths at each of the increasing times `times`.
pub fn simulate_snapshots(
    domain: &ConvexDomain<f64>,
    start: Point,
    times: &[f64],
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PathEnsemble>> {
    check_dt(domain, dt)?;
    run_snapshots(domain, start, times, dt, n_paths, seed)
}

/// Same as [`simulate_snapshots`] without the step-size bound. Used where the
/// bias of a coarse step does not matter (the uniform law is invariant for
/// every step size).
pub(crate) fn run_snapshots(
    domain: &ConvexDomain<f64>,
    start: Point,
    times: &[f64],
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PathEnsemble>> {
    check_start(domain, start)?;
    if n_paths == 0 {
        return Err(invalid("n_paths", "must be positive"));
    }
    if times.is_empty() {
        return Err(invalid("t_final", "no output time given"));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev && t.is_finite()) {
            return Err(invalid("t_final", "times must be finite, non-negative and increasing"));
        }
        prev = t;
    }
    let stepper = Stepper::new(domain, dt)?;
    let nt = times.len();
    let per_path: Vec<(Vec<Point>, StepEvents)> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let mut ev = StepEvents::default();
            let mut x = start;
            let mut t0 = 0.0;
            let mut out = Vec::with_capacity(nt);
            for &t in times {
                x = stepper.run(x, t - t0, &mut rng, &mut ev);
                t0 = t;
                out.push(x);
            }
            (out, ev)
        })
        .collect();
    let mut ens: Vec<PathEnsemble> = times
        .iter()
        .map(|&t| PathEnsemble {
            start,
            t_final: t,
            dt,
            n_paths,
            rng_seed: seed,
            endpoints: Vec::with_capacity(n_paths),
            reflections: 0,
            fallbacks: 0,
        })
        .collect();
    let (mut refl, mut fb) = (0, 0);
    for (pts, ev) in per_path {
        for (e, p) in ens.iter_mut().zip(pts) {
            e.endpoints.push(p);
        }
        refl += ev.reflections;
        fb += ev.fallbacks;
    }
    for e in &mut ens {
        e.reflections = refl;
        e.fallbacks = fb;
    }
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexDomain<f64> {
        ConvexDomain::rectangle(1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_time_returns_start() {
        let p = Point::new(0.3, 0.7);
        let e = simulate(&unit_square(), p, 0.0, 1e-4, 10, 1).unwrap();
        assert!(e.endpoints.iter().all(|&q| q == p));
    }

    #[test]
    fn deterministic_and_inside() {
        let d = unit_square();
        let a = simulate(&d, Point::new(0.5, 0.5), 0.3, 2e-4, 300, 9).unwrap();
        let b = simulate(&d, Point::new(0.5, 0.5), 0.3, 2e-4, 300, 9).unwrap();
        assert_eq!(a.endpoints, b.endpoints);
        assert!(a.endpoints.iter().all(|&p| d.contains(p)));
        assert!(a.reflections > 0);
        let c = simulate(&d, Point::new(0.5, 0.5), 0.3, 2e-4, 300, 10).unwrap();
        assert_ne!(a.endpoints, c.endpoints);
    }

    #[test]
    fn snapshots_match_single_runs() {
        let d = unit_square();
        let s = simulate_snapshots(&d, Point::new(0.2, 0.2), &[0.05, 0.1], 2.5e-4, 50, 3).unwrap();
        let one = simulate(&d, Point::new(0.2, 0.2), 0.1, 2.5e-4, 50, 3).unwrap();
        assert_eq!(s[1].endpoints, one.endpoints);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = unit_square();
        assert!(matches!(
            simulate(&d, Point::new(2.0, 0.5), 1.0, 1e-4, 10, 0),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(simulate(&d, Point::new(0.5, 0.5), 1.0, 1e-3, 10, 0).is_err());
        assert!(simulate(&d, Point::new(0.5, 0.5), 1.0, 1e-4, 0, 0).is_err());
    }

    #[test]
    fn free_variance_is_two_t() {
        // Far from the walls the displacement variance per coordinate is 2t.
        let d = ConvexDomain::rectangle(100.0, 100.0).unwrap();
        let t = 0.5;
        let e = simulate(&d, Point::new(50.0, 50.0), t, 1e-2, 20_000, 4).unwrap();
        let n = e.endpoints.len() as f64;
        let vx = e.endpoints.iter().map(|p| (p.x - 50.0).powi(2)).sum::<f64>() / n;
        let vy = e.endpoints.iter().map(|p| (p.y - 50.0).powi(2)).sum::<f64>() / n;
        // Standard error of a variance estimate: 2t·sqrt(2/n) ≈ 0.01.
        assert!((vx - 2.0 * t).abs() < 0.04, "{vx}");
        assert!((vy - 2.0 * t).abs() < 0.04, "{vy}");
    }
}
