use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point2;
use crate::scalar::Real;

/// Where a domain's vertex list came from. Curved shapes record the
/// polygonalization parameter `k` so that downstream reports can quote it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Polygon,
    Rectangle { length: f64, height: f64 },
    Ellipse { semi_major: f64, semi_minor: f64, k: usize },
    Stadium { length: f64, radius: f64, k: usize },
    Disk { radius: f64, k: usize },
    RandomHull { points: usize, box_length: f64, box_height: f64, seed: u64 },
    /// A rigid motion and/or dilation of another domain.
    Transformed { base: Box<Provenance> },
}

impl Provenance {
    /// Polygonalization parameter for curved shapes.
    pub fn polygonalization_k(&self) -> Option<usize> {
        match self {
            Provenance::Ellipse { k, .. } | Provenance::Stadium { k, .. } | Provenance::Disk { k, .. } => Some(*k),
            Provenance::Transformed { base } => base.polygonalization_k(),
            _ => None,
        }
    }
}

/// A strictly convex polygon with counterclockwise vertices.
///
/// Construction removes repeated and collinear vertices and fixes the
/// orientation; anything that is still not strictly convex is rejected.
#[derive(Clone, Debug)]
pub struct ConvexDomain<T> {
    vertices: Vec<Point2<T>>,
    provenance: Provenance,
}

impl<T: Real> ConvexDomain<T> {
    pub fn new(vertices: Vec<Point2<T>>, provenance: Provenance) -> Result<Self> {
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::DegenerateDomain("non-finite vertex coordinate".into()));
        }
        let scale = vertices
            .iter()
            .fold(T::zero(), |m, p| m.max(p.x.abs()).max(p.y.abs()));
        let tol = T::geom_tol(scale);

        let mut vs: Vec<Point2<T>> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if vs.last().map_or(true, |q: &Point2<T>| q.dist(p) > tol) {
                vs.push(p);
            }
        }
        while vs.len() > 1 && vs[0].dist(*vs.last().unwrap()) <= tol {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(Error::DegenerateDomain(format!(
                "need at least 3 distinct vertices, got {}",
                vs.len()
            )));
        }
        if signed_area(&vs) < T::zero() {
            vs.reverse();
        }

        // Drop vertices whose turn is numerically straight; repeat until stable
        // because removing one vertex changes its neighbours' turns.
        let sin_tol = T::geom_tol(T::one());
        loop {
            let n = vs.len();
            if n < 3 {
                return Err(Error::DegenerateDomain("all vertices collinear".into()));
            }
            let mut keep = Vec::with_capacity(n);
            let mut dropped = false;
            for i in 0..n {
                let a = vs[(i + n - 1) % n];
                let b = vs[i];
                let c = vs[(i + 1) % n];
                let e1 = b - a;
                let e2 = c - b;
                let s = e1.cross(e2) / (e1.norm() * e2.norm());
                if s.abs() <= sin_tol && e1.dot(e2) > T::zero() {
                    dropped = true;
                } else {
                    keep.push(b);
                }
            }
            vs = keep;
            if !dropped {
                break;
            }
        }

        let n = vs.len();
        if n < 3 {
            return Err(Error::DegenerateDomain("all vertices collinear".into()));
        }
        for i in 0..n {
            let a = vs[(i + n - 1) % n];
            let b = vs[i];
            let c = vs[(i + 1) % n];
            let e1 = b - a;
            let e2 = c - b;
            let s = e1.cross(e2) / (e1.norm() * e2.norm());
            if s <= sin_tol {
                return Err(Error::DegenerateDomain(format!(
                    "vertex {i} is not a strictly convex turn"
                )));
            }
        }
        // A star-shaped but winding polygon passes the local test; the total
        // turning must be exactly one revolution.
        let mut turning = T::zero();
        for i in 0..n {
            let e1 = vs[i] - vs[(i + n - 1) % n];
            let e2 = vs[(i + 1) % n] - vs[i];
            turning += e1.cross(e2).atan2(e1.dot(e2));
        }
        if (turning - T::lit(2.0) * T::PI()).abs() > T::lit(1e-6) {
            return Err(Error::DegenerateDomain("polygon winds more than once".into()));
        }
        Ok(Self {
            vertices: vs,
            provenance,
        })
    }

    /// Builds from raw `(x, y)` pairs, tagged as an explicit polygon.
    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        let vs = xy.iter().map(|&(x, y)| Point2::new(T::lit(x), T::lit(y))).collect();
        Self::new(vs, Provenance::Polygon)
    }

    /// Axis-aligned `length × height` rectangle with its lower-left corner at the origin.
    pub fn rectangle(length: T, height: T) -> Result<Self> {
        let z = T::zero();
        Self::new(
            vec![
                Point2::new(z, z),
                Point2::new(length, z),
                Point2::new(length, height),
                Point2::new(z, height),
            ],
            Provenance::Rectangle {
                length: length.to_f64_lossy(),
                height: height.to_f64_lossy(),
            },
        )
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn vertex(&self, i: usize) -> Point2<T> {
        self.vertices[i % self.vertices.len()]
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point2<T>, Point2<T>) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>)> + '_ {
        (0..self.len()).map(move |i| self.edge(i))
    }

    pub fn area(&self) -> T {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> T {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn centroid(&self) -> Point2<T> {
        let mut cx = T::zero();
        let mut cy = T::zero();
        let mut a2 = T::zero();
        for (p, q) in self.edges() {
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
            a2 += w;
        }
        let d = T::lit(3.0) * a2;
        Point2::new(cx / d, cy / d)
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bbox(&self) -> (Point2<T>, Point2<T>) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Largest absolute coordinate, used to scale tolerances.
    pub fn coord_scale(&self) -> T {
        self.vertices
            .iter()
            .fold(T::zero(), |m, p| m.max(p.x.abs()).max(p.y.abs()))
    }

    /// Signed distance from `p` to the line through edge `i`, positive inside.
    #[inline]
    pub fn edge_distance(&self, i: usize, p: Point2<T>) -> T {
        let (a, b) = self.edge(i);
        let e = b - a;
        e.cross(p - a) / e.norm()
    }

    /// Min over edge lines of the signed distance (positive inside). For
    /// interior points this is the Euclidean distance to the boundary.
    pub fn distance_to_boundary(&self, p: Point2<T>) -> T {
        (0..self.len())
            .map(|i| self.edge_distance(i, p))
            .fold(T::infinity(), T::min)
    }

    /// Closed-set membership with a tolerance of `1e-12` relative to the
    /// coordinate scale.
    pub fn contains(&self, p: Point2<T>) -> bool {
        self.contains_tol(p, T::geom_tol(self.coord_scale()))
    }

    pub fn contains_tol(&self, p: Point2<T>, tol: T) -> bool {
        self.distance_to_boundary(p) >= -tol
    }

    /// Nearest point of the closed domain.
    pub fn project(&self, p: Point2<T>) -> Point2<T> {
        if self.contains_tol(p, T::zero()) {
            return p;
        }
        let mut best = self.vertices[0];
        let mut best_d = T::infinity();
        for (a, b) in self.edges() {
            let q = closest_on_segment(a, b, p);
            let d = q.dist(p);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Interior angle at vertex `i`, radians.
    pub fn interior_angle(&self, i: usize) -> T {
        let n = self.len();
        let a = self.vertex(i + n - 1);
        let b = self.vertex(i);
        let c = self.vertex(i + 1);
        let u = a - b;
        let v = c - b;
        v.cross(u).atan2(v.dot(u)).abs()
    }

    /// Applies `p ↦ scale · R(angle) p + shift`.
    pub fn transformed(&self, angle: T, scale: T, shift: Point2<T>) -> Result<Self> {
        let vs = self
            .vertices
            .iter()
            .map(|p| p.rotated(angle) * scale + shift)
            .collect();
        let provenance = match &self.provenance {
            Provenance::Transformed { base } => Provenance::Transformed { base: base.clone() },
            other => Provenance::Transformed {
                base: Box::new(other.clone()),
            },
        };
        Self::new(vs, provenance)
    }

    pub fn cast<U: Real>(&self) -> ConvexDomain<U> {
        ConvexDomain {
            vertices: self.vertices.iter().map(|p| p.cast()).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

pub(crate) fn signed_area<T: Real>(vs: &[Point2<T>]) -> T {
    let n = vs.len();
    let mut s = T::zero();
    for i in 0..n {
        s += vs[i].cross(vs[(i + 1) % n]);
    }
    s * T::lit(0.5)
}

pub(crate) fn closest_on_segment<T: Real>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> Point2<T> {
    let e = b - a;
    let l2 = e.norm2();
    if l2 <= T::zero() {
        return a;
    }
    let t = ((p - a).dot(e) / l2).max(T::zero()).min(T::one());
    a + e * t
}

/// Distance from `p` to the segment `ab`.
pub fn segment_distance<T: Real>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> T {
    closest_on_segment(a, b, p).dist(p)
}
