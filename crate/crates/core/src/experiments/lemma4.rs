//! Plateau of the eigenfunction around its maximum, and nodal-line width.

use std::time::Instant;

use super::report::{LemmaId, Relation, VerificationReport};
use super::solve::SolvedDomain;
use crate::error::{invalid, Result};
use crate::geometry::DomainSpec;
use crate::spectral::{hot_spots, nodal_line_report, DEFAULT_BAND_EPSILON};
use crate::Point;

/// Regime gate for the plateau check.
pub const LEMMA4_MIN_ASPECT: f64 = 8.0;
const CIRCLE_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug)]
pub struct PlateauFit {
    /// Minimum of `φ₁` over the unit ball at the maximum.
    pub m: f64,
    pub phi_max: f64,
    /// `−log(m / φ_max) / μ₁`.
    pub c: f64,
    /// `c · μ₁ · N²`.
    pub c_prime: f64,
    pub x_max: Point,
}

/// `m` is taken over mesh nodes in the ball and over samples of its bounding
/// circle that fall inside the domain.
pub fn plateau_fit(s: &SolvedDomain, radius: f64) -> Result<PlateauFit> {
    let hs = hot_spots(&s.pair, &s.mesh, DEFAULT_BAND_EPSILON)?;
    let x_max = hs.maxima[0].point;
    let phi_max = s.pair.max_value();
    let mut m = f64::INFINITY;
    for (p, &v) in s.mesh.nodes().iter().zip(&s.pair.phi) {
        if p.dist(x_max) <= radius {
            m = m.min(v);
        }
    }
    for k in 0..CIRCLE_SAMPLES {
        let a = std::f64::consts::TAU * k as f64 / CIRCLE_SAMPLES as f64;
        let q = Point::new(x_max.x + radius * a.cos(), x_max.y + radius * a.sin());
        if s.domain.contains(q) {
            m = m.min(s.pair.evaluate(&s.mesh, q)?);
        }
    }
    let c = -(m / phi_max).ln() / s.pair.mu1;
    let n = s.normalization.aspect_n;
    Ok(PlateauFit { m, phi_max, c, c_prime: c * s.pair.mu1 * n * n, x_max })
}

pub fn verify_lemma4(spec: &DomainSpec, s: &SolvedDomain, c_max: f64) -> Result<VerificationReport> {
    let t0 = Instant::now();
    if s.normalization.aspect_n < LEMMA4_MIN_ASPECT {
        return Err(invalid(
            "domain",
            format!("aspect_N = {:.3} is below the regime gate {LEMMA4_MIN_ASPECT}", s.normalization.aspect_n),
        ));
    }
    let f = plateau_fit(s, 1.0)?;
    let mut r = VerificationReport::new(LemmaId::Lemma4, spec.label(), serde_json::to_value(spec)?, spec.seed);
    r.require("c", f.c, Relation::Le, "c_max", c_max)
        .require("m", f.m, Relation::Gt, "m_floor", 0.0)
        .constant("phi_max", f.phi_max)
        .constant("c_prime", f.c_prime)
        .constant("mu1", s.pair.mu1)
        .constant("aspect_N", s.normalization.aspect_n)
        .tolerance("radius", 1.0)
        .tolerance("h", s.mesh.target_h());
    Ok(r.finish(t0))
}

/// Width of the nodal line's projection on the long axis, alone and times `N`.
pub fn verify_nodal_width(spec: &DomainSpec, s: &SolvedDomain, width_max: f64, width_n_max: f64) -> Result<VerificationReport> {
    let t0 = Instant::now();
    let nl = nodal_line_report(&s.pair, &s.mesh);
    let n = s.normalization.aspect_n;
    let mut r = VerificationReport::new(LemmaId::NodalWidth, spec.label(), serde_json::to_value(spec)?, spec.seed);
    r.require("width", nl.x_projection_width, Relation::Le, "width_max", width_max)
        .require("width_times_N", nl.x_projection_width * n, Relation::Le, "width_times_N_max", width_n_max)
        .constant("distance_to_max_fiber", nl.distance_to_max_fiber)
        .constant("aspect_N", n)
        .constant("segments", nl.crossing_segments.len() as f64)
        .tolerance("h", s.mesh.target_h());
    if nl.flagged {
        r.note("eigenvalue flagged as near-degenerate");
    }
    if n < LEMMA4_MIN_ASPECT {
        r.note("outside elongated regime (aspect_N < 8)");
    }
    Ok(r.finish(t0))
}
