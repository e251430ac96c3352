//! Specular reflection of Euler proposals in a convex polygon.

use crate::error::{Error, Result};
use crate::geometry::{inradius_incenter, segment_distance, ConvexDomain};
use crate::Point;

pub const MAX_REFLECTIONS: usize = 8;
/// Inward offset used after the projection fallback.
pub const FALLBACK_STEP: f64 = 1e-9;

/// Uniform grid over the polygon. Each cell stores a lower bound on the
/// distance from any of its points to the boundary, and the edges that a
/// step of length at most `reach` started in the cell can cross.
#[derive(Clone, Debug)]
pub struct EdgeIndex {
    normals: Vec<Point>,
    offsets: Vec<f64>,
    domain: ConvexDomain<f64>,
    incenter: Point,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    margin: Vec<f64>,
    cand_start: Vec<u32>,
    cand: Vec<u32>,
    all: Vec<u32>,
    reach: f64,
}

/// Outcome counters of [`EdgeIndex::advance`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepEvents {
    pub reflections: u64,
    pub fallbacks: u64,
}

impl EdgeIndex {
    /// `reach` bounds the step lengths served by the cell candidate lists;
    /// longer steps fall back to a scan over all edges.
    pub fn new(domain: &ConvexDomain<f64>, reach: f64) -> Result<Self> {
        let (inrad, incenter) = inradius_incenter(domain)?;
        let n = domain.len();
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for (a, b) in domain.edges() {
            let e = b - a;
            let nrm = e.perp() * (1.0 / e.norm());
            normals.push(nrm);
            offsets.push(nrm.dot(a));
        }
        let (lo, hi) = domain.bbox();
        let cell = (0.5 * inrad).min(reach.max(0.25 * inrad));
        let nx = ((hi.x - lo.x) / cell).ceil().max(1.0) as usize;
        let ny = ((hi.y - lo.y) / cell).ceil().max(1.0) as usize;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(Error::InvalidParameter {
                field: "reach",
                reason: "edge index grid too large".into(),
            });
        }
        let half_diag = cell * std::f64::consts::FRAC_1_SQRT_2;
        let mut margin = Vec::with_capacity(nx * ny);
        let mut cand_start = vec![0u32];
        let mut cand = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let c = Point::new(lo.x + (i as f64 + 0.5) * cell, lo.y + (j as f64 + 0.5) * cell);
                margin.push(domain.distance_to_boundary(c) - half_diag);
                for (k, (a, b)) in domain.edges().enumerate() {
                    if segment_distance(a, b, c) <= half_diag + reach {
                        cand.push(k as u32);
                    }
                }
                cand_start.push(cand.len() as u32);
            }
        }
        Ok(Self {
            normals,
            offsets,
            domain: domain.clone(),
            incenter,
            origin: lo,
            cell,
            nx,
            ny,
            margin,
            cand_start,
            cand,
            all: (0..n as u32).collect(),
            reach,
        })
    }

    pub fn domain(&self) -> &ConvexDomain<f64> {
        &self.domain
    }

    #[inline]
    fn cell_of(&self, p: Point) -> usize {
        let i = (((p.x - self.origin.x) / self.cell) as isize).clamp(0, self.nx as isize - 1) as usize;
        let j = (((p.y - self.origin.y) / self.cell) as isize).clamp(0, self.ny as isize - 1) as usize;
        j * self.nx + i
    }

    #[inline]
    fn dist(&self, k: usize, p: Point) -> f64 {
        self.normals[k].dot(p) - self.offsets[k]
    }

    /// Moves from `x` (in the closed domain) towards the proposal `y`,
    /// reflecting specularly off every edge the straight path meets.
    #[inline]
    pub fn advance(&self, x: Point, y: Point, ev: &mut StepEvents) -> Point {
        let c = self.cell_of(x);
        let d2 = (y - x).norm2();
        let m = self.margin[c];
        if m > 0.0 && d2 < m * m {
            return y;
        }
        if d2 <= self.reach * self.reach {
            let r = self.cand_start[c] as usize..self.cand_start[c + 1] as usize;
            self.bounce(x, y, &self.cand[r], ev)
        } else {
            self.bounce(x, y, &self.all, ev)
        }
    }

    fn bounce(&self, mut x: Point, mut y: Point, edges: &[u32], ev: &mut StepEvents) -> Point {
        for _ in 0..=MAX_REFLECTIONS {
            let mut first: Option<(f64, usize, f64)> = None;
            for &k in edges {
                let k = k as usize;
                let dy = self.dist(k, y);
                if dy < 0.0 {
                    let dx = self.dist(k, x).max(0.0);
                    let s = dx / (dx - dy);
                    if first.is_none_or(|(s0, _, _)| s < s0) {
                        first = Some((s, k, dy));
                    }
                }
            }
            let Some((s, k, dy)) = first else {
                return y;
            };
            ev.reflections += 1;
            x = x.lerp(y, s);
            y = y - self.normals[k] * (2.0 * dy);
        }
        ev.fallbacks += 1;
        let p = self.domain.project(y);
        let dir = self.incenter - p;
        let len = dir.norm();
        if len > 0.0 {
            p + dir * (FALLBACK_STEP / len)
        } else {
            p
        }
    }
}
