//! Rotating calipers: diameter, minimal width, near-diameter vertex pairs.

use serde::{Deserialize, Serialize};

use super::chebyshev::inradius_incenter;
use super::domain::ConvexDomain;
use crate::error::{invalid, Result};
use crate::point::{orient, Point2};
use crate::scalar::Real;

/// Caliper sweep output: for each edge `i`, the farthest vertex from the
/// edge line (and the next one when the two tie, i.e. parallel edges).
struct Sweep<T> {
    farthest: Vec<(usize, Option<usize>)>,
    heights: Vec<T>,
}

fn sweep<T: Real>(d: &ConvexDomain<T>) -> Sweep<T> {
    let v = d.vertices();
    let n = v.len();
    let tol = T::geom_tol(d.coord_scale()) * d.coord_scale().max(T::one());
    let mut farthest = Vec::with_capacity(n);
    let mut heights = Vec::with_capacity(n);
    let mut j = 1 % n;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if i == 0 {
            j = (i + 1) % n;
        }
        // Area of (a, b, v[j]) is unimodal in j along the chain opposite the edge.
        loop {
            let next = (j + 1) % n;
            if orient(a, b, v[next]) > orient(a, b, v[j]) + tol {
                j = next;
            } else {
                break;
            }
        }
        let next = (j + 1) % n;
        let tie = (orient(a, b, v[next]) - orient(a, b, v[j])).abs() <= tol && next != i;
        farthest.push((j, if tie { Some(next) } else { None }));
        heights.push(orient(a, b, v[j]) / a.dist(b));
    }
    Sweep { farthest, heights }
}

/// Antipodal vertex pairs `(i, j)` with `i < j`, sorted and deduplicated.
pub fn antipodal_pairs<T: Real>(d: &ConvexDomain<T>) -> Vec<(usize, usize)> {
    let n = d.len();
    let s = sweep(d);
    let mut out = Vec::with_capacity(2 * n);
    for (i, &(j, tie)) in s.farthest.iter().enumerate() {
        for k in std::iter::once(j).chain(tie) {
            for e in [i, (i + 1) % n] {
                if e != k {
                    out.push((e.min(k), e.max(k)));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// A vertex pair achieving the diameter, found by rotating calipers.
pub fn diameter<T: Real>(d: &ConvexDomain<T>) -> (Point2<T>, Point2<T>, T) {
    let (i, j, dist) = diameter_indices(d);
    (d.vertex(i), d.vertex(j), dist)
}

pub fn diameter_indices<T: Real>(d: &ConvexDomain<T>) -> (usize, usize, T) {
    let mut best = (0, 1, T::neg_infinity());
    for (i, j) in antipodal_pairs(d) {
        let dist = d.vertex(i).dist(d.vertex(j));
        if dist > best.2 {
            best = (i, j, dist);
        }
    }
    best
}

/// Minimal width over all directions together with the edge realizing it.
/// The minimal width of a convex polygon is always attained orthogonal to an edge.
pub fn min_width<T: Real>(d: &ConvexDomain<T>) -> (T, usize) {
    let s = sweep(d);
    let mut best = (T::infinity(), 0);
    for (i, &h) in s.heights.iter().enumerate() {
        if h < best.0 {
            best = (h, i);
        }
    }
    best
}

/// Widths orthogonal to every edge, indexed by edge.
pub fn edge_widths<T: Real>(d: &ConvexDomain<T>) -> Vec<T> {
    sweep(d).heights
}

/// Width of the domain along unit direction `u` (extent of the projection).
pub fn width_along<T: Real>(d: &ConvexDomain<T>, u: Point2<T>) -> T {
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for p in d.vertices() {
        let s = p.dot(u);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    hi - lo
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterPair<T> {
    pub i: usize,
    pub j: usize,
    pub a: Point2<T>,
    pub b: Point2<T>,
    pub distance: T,
}

/// All vertex pairs within `rel_tol` of the diameter, plus a two-cluster
/// summary of their endpoints.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiameterPairSet<T> {
    /// Sorted by decreasing distance, then by vertex indices. The first entry
    /// is the exact diameter pair.
    pub pairs: Vec<DiameterPair<T>>,
    pub cluster_centers: [Point2<T>; 2],
    /// `(vertex index, cluster)` for every distinct endpoint, sorted by index.
    pub endpoint_clusters: Vec<(usize, usize)>,
    pub cluster_radius: T,
    pub inradius: T,
    pub cluster_radius_over_inrad: T,
    pub diameter: T,
}

/// Near-diameter pairs: every vertex pair at distance `≥ (1 − rel_tol)·diam`.
///
/// Candidates are pruned by projection onto the diameter direction: a pair
/// can only qualify if its projected separation is at least
/// `sqrt(thr² − w⊥²)`, where `w⊥` is the perpendicular extent.
pub fn all_diameter_pairs<T: Real>(d: &ConvexDomain<T>, rel_tol: T) -> Result<DiameterPairSet<T>> {
    if !(rel_tol > T::zero() && rel_tol <= T::lit(1e-3)) {
        return Err(invalid("rel_tol", "must lie in (0, 1e-3]"));
    }
    let (i0, j0, diam) = diameter_indices(d);
    let thr = (T::one() - rel_tol) * diam;
    let u = (d.vertex(j0) - d.vertex(i0)) * (T::one() / diam);
    let w_perp = width_along(d, u.perp());
    let gap = (thr * thr - w_perp * w_perp).max(T::zero()).sqrt();

    let v = d.vertices();
    let mut order: Vec<usize> = (0..v.len()).collect();
    let proj: Vec<T> = v.iter().map(|p| p.dot(u)).collect();
    order.sort_by(|&a, &b| proj[a].partial_cmp(&proj[b]).unwrap().then(a.cmp(&b)));
    let sorted_proj: Vec<T> = order.iter().map(|&k| proj[k]).collect();

    let mut pairs = Vec::new();
    for (pos, &a) in order.iter().enumerate() {
        let need = sorted_proj[pos] + gap;
        let start = pos + 1 + sorted_proj[pos + 1..].partition_point(|&s| s < need);
        for &b in &order[start..] {
            let dist = v[a].dist(v[b]);
            if dist >= thr {
                let (i, j) = (a.min(b), a.max(b));
                pairs.push(DiameterPair {
                    i,
                    j,
                    a: v[i],
                    b: v[j],
                    distance: dist,
                });
            }
        }
    }
    sort_pairs(&mut pairs, (i0.min(j0), i0.max(j0)));
    let (inradius, _) = inradius_incenter(d)?;
    Ok(cluster_pairs(pairs, inradius, diam))
}

/// Deterministic order: exact diameter pair first, then decreasing distance.
pub(crate) fn sort_pairs<T: Real>(pairs: &mut [DiameterPair<T>], first: (usize, usize)) {
    pairs.sort_by(|p, q| {
        let pf = (p.i, p.j) == first;
        let qf = (q.i, q.j) == first;
        qf.cmp(&pf)
            .then(q.distance.partial_cmp(&p.distance).unwrap())
            .then((p.i, p.j).cmp(&(q.i, q.j)))
    });
}

/// Two-means over pair endpoints, initialized at the first pair's endpoints.
/// The two endpoints of a pair always land in opposite clusters; pairs are
/// oriented in list order, so a vertex shared by several pairs follows the
/// first of them.
pub fn cluster_pairs<T: Real>(pairs: Vec<DiameterPair<T>>, inradius: T, diameter: T) -> DiameterPairSet<T> {
    let mut pts: Vec<(usize, Point2<T>)> = pairs
        .iter()
        .flat_map(|p| [(p.i, p.a), (p.j, p.b)])
        .collect();
    pts.sort_by_key(|&(k, _)| k);
    pts.dedup_by_key(|&mut (k, _)| k);
    let slot_of = |k: usize| pts.binary_search_by_key(&k, |&(v, _)| v).unwrap();

    let mut centers = [pairs[0].a, pairs[0].b];
    let mut assign = vec![usize::MAX; pts.len()];
    for _ in 0..100 {
        let mut next_assign = vec![usize::MAX; pts.len()];
        for p in &pairs {
            let keep = p.a.dist(centers[0]) + p.b.dist(centers[1]);
            let swap = p.a.dist(centers[1]) + p.b.dist(centers[0]);
            let ca = usize::from(swap < keep);
            for (k, c) in [(p.i, ca), (p.j, 1 - ca)] {
                let s = slot_of(k);
                if next_assign[s] == usize::MAX {
                    next_assign[s] = c;
                }
            }
        }
        let changed = next_assign != assign;
        assign = next_assign;
        let mut next = centers;
        for (c, center) in next.iter_mut().enumerate() {
            let members: Vec<Point2<T>> = pts
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(&(_, p), _)| p)
                .collect();
            if !members.is_empty() {
                let inv = T::one() / T::from_usize_lossy(members.len());
                *center = members.iter().fold(Point2::zero(), |s, &p| s + p) * inv;
            }
        }
        let moved = next != centers;
        centers = next;
        if !changed && !moved {
            break;
        }
    }
    let radius = pts
        .iter()
        .zip(&assign)
        .map(|(&(_, p), &c)| p.dist(centers[c]))
        .fold(T::zero(), T::max);
    DiameterPairSet {
        pairs,
        cluster_centers: centers,
        endpoint_clusters: pts.iter().zip(&assign).map(|(&(k, _), &c)| (k, c)).collect(),
        cluster_radius: radius,
        inradius,
        cluster_radius_over_inrad: radius / inradius,
        diameter,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub c_estimate: f64,
    pub c_max: f64,
    pub pass: bool,
    pub n_pairs: usize,
    pub aspect: f64,
    pub rel_tol: f64,
}

/// Checks that all near-diameter endpoints fall into two tight clusters.
/// Requires `diam / inrad ≥ 4`.
pub fn verify_diameter_clustering<T: Real>(
    d: &ConvexDomain<T>,
    rel_tol: T,
    c_max: f64,
) -> Result<ClusteringReport> {
    let set = all_diameter_pairs(d, rel_tol)?;
    let aspect = (set.diameter / set.inradius).to_f64_lossy();
    if aspect < 4.0 {
        return Err(invalid("domain", format!("diam/inrad = {aspect:.3} is below 4")));
    }
    let c = set.cluster_radius_over_inrad.to_f64_lossy();
    Ok(ClusteringReport {
        c_estimate: c,
        c_max,
        pass: c.is_finite() && c <= c_max,
        n_pairs: set.pairs.len(),
        aspect,
        rel_tol: rel_tol.to_f64_lossy(),
    })
}
