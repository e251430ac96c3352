//! JSON description of a domain, as accepted by the command-line front-end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::domain::{ConvexDomain, Provenance};
use super::hull::convex_hull;
use crate::error::{invalid, Result};
use crate::point::Point2;

pub const DEFAULT_POLYGONALIZATION_K: usize = 256;

fn default_k() -> usize {
    DEFAULT_POLYGONALIZATION_K
}

fn one() -> f64 {
    1.0
}

/// Shape selector plus shared fields. Curved shapes are turned into
/// `polygonalization_k`-gons inscribed in the exact curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default = "default_k")]
    pub polygonalization_k: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Polygon { vertices: Vec<[f64; 2]> },
    Rectangle {
        length: f64,
        #[serde(default = "one")]
        height: f64,
    },
    Ellipse { semi_major: f64, semi_minor: f64 },
    /// Rectangle `length × 2·radius` with half-disk caps on the short sides.
    Stadium { length: f64, radius: f64 },
    Disk {
        #[serde(default = "one")]
        radius: f64,
    },
    /// Convex hull of `points` uniform samples in `[0, box_length] × [0, box_height]`.
    RandomHull {
        points: usize,
        box_length: f64,
        #[serde(default = "one")]
        box_height: f64,
    },
}

impl DomainSpec {
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            polygonalization_k: DEFAULT_POLYGONALIZATION_K,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.polygonalization_k = k;
        self
    }

    pub fn rectangle(length: f64, height: f64) -> Self {
        Self::new(Shape::Rectangle { length, height })
    }

    pub fn ellipse(semi_major: f64, semi_minor: f64) -> Self {
        Self::new(Shape::Ellipse { semi_major, semi_minor })
    }

    pub fn stadium(length: f64, radius: f64) -> Self {
        Self::new(Shape::Stadium { length, radius })
    }

    pub fn disk(radius: f64) -> Self {
        Self::new(Shape::Disk { radius })
    }

    pub fn random_hull(points: usize, box_length: f64, box_height: f64, seed: u64) -> Self {
        Self::new(Shape::RandomHull { points, box_length, box_height }).with_seed(seed)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Short label used in report rows, e.g. `ellipse(8,1)`.
    pub fn label(&self) -> String {
        match &self.shape {
            Shape::Polygon { vertices } => format!("polygon[{}]", vertices.len()),
            Shape::Rectangle { length, height } => format!("rectangle({length},{height})"),
            Shape::Ellipse { semi_major, semi_minor } => format!("ellipse({semi_major},{semi_minor})"),
            Shape::Stadium { length, radius } => format!("stadium({length},{radius})"),
            Shape::Disk { radius } => format!("disk({radius})"),
            Shape::RandomHull { points, box_length, box_height } => {
                format!("random_hull({points},{box_length}x{box_height},seed={})", self.seed)
            }
        }
    }

    pub fn build(&self) -> Result<ConvexDomain<f64>> {
        let k = self.polygonalization_k;
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive and finite, got {v}")))
            }
        };
        let curved = matches!(self.shape, Shape::Ellipse { .. } | Shape::Stadium { .. } | Shape::Disk { .. });
        if curved && !(8..=1 << 16).contains(&k) {
            return Err(invalid("polygonalization_k", format!("must lie in [8, 65536], got {k}")));
        }
        match &self.shape {
            Shape::Polygon { vertices } => {
                let vs = vertices.iter().map(|v| Point2::new(v[0], v[1])).collect();
                ConvexDomain::new(vs, Provenance::Polygon)
            }
            &Shape::Rectangle { length, height } => {
                positive("length", length)?;
                positive("height", height)?;
                ConvexDomain::rectangle(length, height)
            }
            &Shape::Ellipse { semi_major, semi_minor } => {
                positive("semi_major", semi_major)?;
                positive("semi_minor", semi_minor)?;
                ConvexDomain::new(
                    ellipse_points(semi_major, semi_minor, k),
                    Provenance::Ellipse { semi_major, semi_minor, k },
                )
            }
            &Shape::Disk { radius } => {
                positive("radius", radius)?;
                ConvexDomain::new(ellipse_points(radius, radius, k), Provenance::Disk { radius, k })
            }
            &Shape::Stadium { length, radius } => {
                positive("length", length)?;
                positive("radius", radius)?;
                ConvexDomain::new(stadium_points(length, radius, k), Provenance::Stadium { length, radius, k })
            }
            &Shape::RandomHull { points, box_length, box_height } => {
                positive("box_length", box_length)?;
                positive("box_height", box_height)?;
                if points < 3 {
                    return Err(invalid("points", "need at least 3"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let pts: Vec<Point2<f64>> = (0..points)
                    .map(|_| Point2::new(rng.random::<f64>() * box_length, rng.random::<f64>() * box_height))
                    .collect();
                ConvexDomain::new(
                    convex_hull(&pts),
                    Provenance::RandomHull { points, box_length, box_height, seed: self.seed },
                )
            }
        }
    }
}

fn ellipse_points(a: f64, b: f64, k: usize) -> Vec<Point2<f64>> {
    (0..k)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / k as f64;
            Point2::new(a * t.cos(), b * t.sin())
        })
        .collect()
}

// Each cap carries k/2 + 1 points including both ends of its half circle.
fn stadium_points(length: f64, radius: f64, k: usize) -> Vec<Point2<f64>> {
    let m = k / 2;
    let half = 0.5 * length;
    let mut out = Vec::with_capacity(2 * m + 2);
    for (cx, start) in [(half, -std::f64::consts::FRAC_PI_2), (-half, std::f64::consts::FRAC_PI_2)] {
        for j in 0..=m {
            let t = start + std::f64::consts::PI * j as f64 / m as f64;
            out.push(Point2::new(cx + radius * t.cos(), radius * t.sin()));
        }
    }
    out
}
