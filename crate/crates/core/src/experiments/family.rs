//! Deterministic domain families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{normalize, ConvexDomain, DomainSpec, Shape};
use crate::stochastic::rng::sub_seed;

fn hull_points() -> usize {
    20
}
fn hull_min_length() -> f64 {
    6.0
}
fn hull_max_length() -> f64 {
    20.0
}
fn hull_min_aspect() -> f64 {
    4.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `N × 1` rectangles.
    Rectangles { ns: Vec<f64> },
    /// Ellipses with semi-axes `(a, 1)`.
    Ellipses { aspects: Vec<f64> },
    /// Stadiums of overall extent `N × 1`.
    Stadiums { aspects: Vec<f64> },
    /// Hulls of uniform points in an `M × 1` box, `M` uniform in
    /// `[min_length, max_length]`, redrawn until `aspect_N ≥ min_aspect`.
    RandomHulls {
        count: usize,
        #[serde(default = "hull_points")]
        points: usize,
        #[serde(default = "hull_min_length")]
        min_length: f64,
        #[serde(default = "hull_max_length")]
        max_length: f64,
        #[serde(default = "hull_min_aspect")]
        min_aspect: f64,
    },
    /// Triangles `(0,0), (1,0), (u,v)` with `u ∈ [0,1]`, `v ∈ [0.2, 1.5]`.
    Triangles { count: usize },
}

impl FamilySpec {
    pub fn random_hulls(count: usize) -> Self {
        FamilySpec::RandomHulls {
            count,
            points: hull_points(),
            min_length: hull_min_length(),
            max_length: hull_max_length(),
            min_aspect: hull_min_aspect(),
        }
    }

    /// Ellipses {4, 8, 16}, stadiums {8, 16}, rectangles {5, 10, 20} and
    /// `n_hulls` random hulls.
    pub fn standard_sweep(n_hulls: usize) -> Vec<FamilySpec> {
        vec![
            FamilySpec::Ellipses { aspects: vec![4.0, 8.0, 16.0] },
            FamilySpec::Stadiums { aspects: vec![8.0, 16.0] },
            FamilySpec::Rectangles { ns: vec![5.0, 10.0, 20.0] },
            FamilySpec::random_hulls(n_hulls),
        ]
    }
}

const MAX_REDRAWS: u64 = 1000;

/// Member specs of a family; random members draw from `sub_seed(seed, i)`.
pub fn domain_family(spec: &FamilySpec, seed: u64) -> Result<Vec<DomainSpec>> {
    let check = |field: &'static str, v: &[f64], min: f64| -> Result<()> {
        if v.is_empty() || v.iter().any(|&x| !(x.is_finite() && x >= min)) {
            return Err(invalid(field, format!("need a non-empty list of values ≥ {min}")));
        }
        Ok(())
    };
    match spec {
        FamilySpec::Rectangles { ns } => {
            check("ns", ns, 1.0)?;
            Ok(ns.iter().map(|&n| DomainSpec::rectangle(n, 1.0)).collect())
        }
        FamilySpec::Ellipses { aspects } => {
            check("aspects", aspects, 1.0)?;
            Ok(aspects.iter().map(|&a| DomainSpec::ellipse(a, 1.0)).collect())
        }
        FamilySpec::Stadiums { aspects } => {
            check("aspects", aspects, 1.0)?;
            Ok(aspects
                .iter()
                .map(|&a| {
                    let mut s = DomainSpec::stadium(a - 1.0, 0.5);
                    // Keep vertex spacing comparable to the ellipses for long members.
                    s.polygonalization_k = 128;
                    s
                })
                .collect())
        }
        &FamilySpec::RandomHulls { count, points, min_length, max_length, min_aspect } => {
            if points < 3 {
                return Err(invalid("points", "need at least 3"));
            }
            if !(min_length > 0.0 && max_length >= min_length && max_length.is_finite()) {
                return Err(invalid("min_length", "need 0 < min_length ≤ max_length"));
            }
            (0..count as u64)
                .map(|i| {
                    for attempt in 0..MAX_REDRAWS {
                        let s = sub_seed(seed, i + (attempt << 32));
                        let mut rng = ChaCha8Rng::seed_from_u64(s);
                        let len = min_length + (max_length - min_length) * rng.random::<f64>();
                        let spec = DomainSpec::random_hull(points, len, 1.0, s);
                        let Ok(d) = spec.build() else { continue };
                        let Ok((_, rep)) = normalize(&d) else { continue };
                        if rep.aspect_n >= min_aspect {
                            return Ok(spec);
                        }
                    }
                    Err(invalid("min_aspect", format!("no hull reached aspect {min_aspect} in {MAX_REDRAWS} draws")))
                })
                .collect()
        }
        &FamilySpec::Triangles { count } => Ok((0..count as u64)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i));
                let u = rng.random::<f64>();
                let v = 0.2 + 1.3 * rng.random::<f64>();
                DomainSpec::new(Shape::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [u, v]] }).with_seed(seed)
            })
            .collect()),
    }
}

/// Builds every member of every family.
pub fn build_family(specs: &[FamilySpec], seed: u64) -> Result<Vec<(DomainSpec, ConvexDomain<f64>)>> {
    let mut out = Vec::new();
    for (k, f) in specs.iter().enumerate() {
        for s in domain_family(f, sub_seed(seed, k as u64))? {
            let d = s.build()?;
            out.push((s, d));
        }
    }
    Ok(out)
}
