//! `μ₁ N²` across a family, and volume comparability of balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use super::report::{LemmaId, Relation, VerificationReport};
use super::solve::solve_normalized;
use crate::error::{invalid, Result};
use crate::geometry::{ball_volume, diameter_indices, inradius_incenter, ConvexDomain, DomainSpec, Shape};
use crate::Point;

/// One solved family member: `μ₁` and `N` in normalized units.
#[derive(Clone, Debug)]
pub struct ScalingEntry {
    pub spec: DomainSpec,
    pub mu1: f64,
    /// Normalized length along the long axis (`x_extent / inradius`);
    /// `2L` for an `L × 1` rectangle, whose `μ₁` is then exactly `π² / N²`.
    pub n: f64,
}

/// `μ₁ N²` for each member solved in normalized units, with `N` the
/// normalized x-extent. Rectangles must also give `π²` within `rect_rel_tol`.
pub fn eigenvalue_scaling(members: &[DomainSpec], h: f64, bound: f64, rect_rel_tol: f64) -> Result<VerificationReport> {
    let entries = members
        .iter()
        .map(|m| {
            let s = solve_normalized(&m.build()?, h)?;
            Ok(ScalingEntry { spec: m.clone(), mu1: s.pair.mu1, n: s.normalization.x_extent })
        })
        .collect::<Result<Vec<_>>>()?;
    scaling_report(&entries, h, bound, rect_rel_tol)
}

pub fn scaling_report(entries: &[ScalingEntry], h: f64, bound: f64, rect_rel_tol: f64) -> Result<VerificationReport> {
    let t0 = Instant::now();
    if entries.len() < 4 {
        return Err(invalid("family", format!("need at least 4 members, got {}", entries.len())));
    }
    let members: Vec<&DomainSpec> = entries.iter().map(|e| &e.spec).collect();
    let label = members.iter().map(|m| m.label()).collect::<Vec<_>>().join(" ");
    let mut r = VerificationReport::new(LemmaId::EigenvalueScaling, label, serde_json::to_value(&members)?, 0);
    r.tolerance("bound", bound).tolerance("rect_rel_tol", rect_rel_tol).tolerance("h", h);
    let pi2 = std::f64::consts::PI.powi(2);
    for (i, e) in entries.iter().enumerate() {
        let (m, n) = (&e.spec, e.n);
        let v = e.mu1 * n * n;
        let key = format!("mu1_N2[{i}]");
        r.constant(&key, v);
        r.checks.push(super::report::Check::new(&key, Relation::Le, "bound"));
        if matches!(m.shape, Shape::Rectangle { .. }) {
            let ek = format!("rect_rel_error[{i}]");
            r.constant(&ek, (v - pi2).abs() / pi2);
            r.checks.push(super::report::Check::new(&ek, Relation::Le, "rect_rel_tol"));
        }
    }
    Ok(r.finish(t0))
}

#[derive(Clone, Copy, Debug)]
pub struct VolumeRatios {
    pub min: f64,
    pub max: f64,
    pub pairs: usize,
}

fn sample_inside(d: &ConvexDomain<f64>, rng: &mut ChaCha8Rng) -> Point {
    let (lo, hi) = d.bbox();
    loop {
        let p = Point::new(lo.x + (hi.x - lo.x) * rng.random::<f64>(), lo.y + (hi.y - lo.y) * rng.random::<f64>());
        if d.contains(p) {
            return p;
        }
    }
}

/// `V(x, 1) / V(y, δ)` over random pairs with `|x − y| ≤ 1` and over
/// placements at the vertices: `y = x`, and `y` one unit towards the incenter.
pub fn volume_ratios(d: &ConvexDomain<f64>, delta: f64, n_pairs: usize, seed: u64) -> Result<VolumeRatios> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1], got {delta}")));
    }
    let (_, inc) = inradius_incenter(d)?;
    let mut pairs: Vec<(Point, Point)> = Vec::new();
    let (i, j, _) = diameter_indices(d);
    let stride = (d.len() / 64).max(1);
    let mut corners: Vec<usize> = (0..d.len()).step_by(stride).collect();
    corners.extend([i, j]);
    for v in corners {
        let x = d.vertex(v);
        pairs.push((x, x));
        let u = inc - x;
        let l = u.norm();
        if l > 0.0 {
            let y = x + u * (1.0f64.min(l) / l);
            pairs.push((x, y));
            pairs.push((y, x));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pairs.len() < n_pairs + 3 * 66 {
        let x = sample_inside(d, &mut rng);
        let rho = rng.random::<f64>();
        let th = std::f64::consts::TAU * rng.random::<f64>();
        let y = Point::new(x.x + rho * th.cos(), x.y + rho * th.sin());
        if d.contains(y) {
            pairs.push((x, y));
        }
    }
    let mut out = VolumeRatios { min: f64::INFINITY, max: 0.0, pairs: pairs.len() };
    for (x, y) in pairs {
        let r = ball_volume(d, x, 1.0)? / ball_volume(d, y, delta)?;
        out.min = out.min.min(r);
        out.max = out.max.max(r);
    }
    Ok(out)
}

pub fn verify_volume_comparability(
    spec: &DomainSpec,
    normalized: &ConvexDomain<f64>,
    delta: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let v = volume_ratios(normalized, delta, n_pairs, seed)?;
    let mut r = VerificationReport::new(LemmaId::Lemma2, spec.label(), serde_json::to_value(spec)?, seed);
    r.require("c1_delta", v.min, Relation::Gt, "zero", 0.0)
        .require("c2_delta", v.max, Relation::Lt, "infinity", f64::MAX)
        .constant("pairs", v.pairs as f64)
        .tolerance("delta", delta);
    Ok(r.finish(t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_and_corner_ratio() {
        let d = ConvexDomain::rectangle(10.0, 10.0).unwrap();
        let x = Point::new(5.0, 5.0);
        let r = ball_volume(&d, x, 1.0).unwrap() / ball_volume(&d, x, 0.25).unwrap();
        assert!((r - 16.0).abs() < 1e-9);
        let c = Point::new(0.0, 0.0);
        let r = ball_volume(&d, c, 1.0).unwrap() / ball_volume(&d, c, 0.25).unwrap();
        assert!((r - 16.0).abs() < 1e-9);
    }

    #[test]
    fn ratios_bracket_delta_power() {
        let d = ConvexDomain::rectangle(20.0, 2.0).unwrap();
        let v = volume_ratios(&d, 0.5, 200, 1).unwrap();
        assert!(v.min > 0.0 && v.max.is_finite());
        assert!(v.min <= 4.0 + 1e-9 && v.max >= 4.0 - 1e-9);
    }
}
