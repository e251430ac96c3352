//! Incremental Delaunay triangulation of a convex polygon followed by
//! Ruppert-style refinement.
//!
//! Every input point lies in the polygon, so the triangulation always covers
//! the convex hull and the polygon's edges (split into subsegments) are
//! exactly the triangulation's boundary edges. No constrained edges exist in
//! the interior, which keeps the Lawson flip logic unconditional.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::ConvexDomain;
use crate::point::{orient, Point2};
use crate::scalar::Real;

pub(crate) const NONE: usize = usize::MAX;

/// Refinement targets.
#[derive(Clone, Copy, Debug)]
pub struct MeshOptions {
    /// Triangles with a smaller angle are split (except at sharp input corners).
    pub min_angle_deg: f64,
    /// Triangles with circumradius above `size_factor · h` are split.
    pub size_factor: f64,
    /// Hard cap on the node count.
    pub max_nodes: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            min_angle_deg: 20.0,
            size_factor: 0.8,
            max_nodes: 3_000_000,
        }
    }
}

/// Input corners below this angle are exempt from the angle criterion.
pub(crate) const SHARP_CORNER_DEG: f64 = 60.0;

enum Loc {
    Inside(usize),
    OnEdge(usize, usize),
    Vertex,
    Outside(usize, usize),
}

pub(crate) struct Builder<T> {
    pub pts: Vec<Point2<T>>,
    pub boundary: Vec<bool>,
    /// Polygon edge carrying a boundary split point.
    on_edge: Vec<usize>,
    /// Polygon vertex index for input corners.
    corner_of: Vec<usize>,
    corner_angle: Vec<T>,
    pub tri: Vec<[usize; 3]>,
    nbr: Vec<[usize; 3]>,
    vtri: Vec<usize>,
    last: usize,
    touched: Vec<usize>,
    n_corners: usize,
    len_tol: T,
    circle_eps: T,
}

impl<T: Real> Builder<T> {
    /// Fan triangulation of the polygon corners, flipped to Delaunay.
    pub fn new(d: &ConvexDomain<T>) -> Self {
        let n = d.len();
        let mut b = Self {
            pts: d.vertices().to_vec(),
            boundary: vec![true; n],
            on_edge: vec![NONE; n],
            corner_of: (0..n).collect(),
            corner_angle: (0..n).map(|i| d.interior_angle(i)).collect(),
            tri: Vec::with_capacity(4 * n),
            nbr: Vec::with_capacity(4 * n),
            vtri: vec![0; n],
            last: 0,
            touched: Vec::new(),
            n_corners: n,
            len_tol: T::geom_tol(d.coord_scale()),
            circle_eps: T::epsilon() * T::lit(64.0),
        };
        for k in 0..n - 2 {
            let next = if k + 1 <= n - 3 { k + 1 } else { NONE };
            let prev = if k >= 1 { k - 1 } else { NONE };
            b.new_tri([0, k + 1, k + 2], [NONE, next, prev]);
        }
        loop {
            let mut flipped = false;
            for t in 0..b.tri.len() {
                for k in 0..3 {
                    flipped |= b.try_flip(t, k);
                }
            }
            if !flipped {
                break;
            }
        }
        b.touched.clear();
        b
    }

    fn new_tri(&mut self, v: [usize; 3], n: [usize; 3]) -> usize {
        let id = self.tri.len();
        self.tri.push(v);
        self.nbr.push(n);
        for &x in &v {
            self.vtri[x] = id;
        }
        self.touched.push(id);
        self.last = id;
        id
    }

    fn set_tri(&mut self, t: usize, v: [usize; 3], n: [usize; 3]) {
        self.tri[t] = v;
        self.nbr[t] = n;
        for &x in &v {
            self.vtri[x] = t;
        }
        self.touched.push(t);
    }

    fn replace_nbr(&mut self, t: usize, old: usize, new: usize) {
        if t == NONE {
            return;
        }
        for k in 0..3 {
            if self.nbr[t][k] == old {
                self.nbr[t][k] = new;
                return;
            }
        }
        debug_assert!(false, "adjacency corrupted");
    }

    fn add_point(&mut self, p: Point2<T>, on_edge: usize) -> usize {
        self.pts.push(p);
        self.boundary.push(on_edge != NONE);
        self.on_edge.push(on_edge);
        self.corner_of.push(NONE);
        self.corner_angle.push(T::PI());
        self.vtri.push(NONE);
        self.pts.len() - 1
    }

    /// `d` strictly inside the circumcircle of counterclockwise `a, b, c`.
    fn in_circle(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        self.in_circle_pt(a, b, c, self.pts[d])
    }

    fn in_circle_pt(&self, a: usize, b: usize, c: usize, d: Point2<T>) -> bool {
        let ad = self.pts[a] - d;
        let bd = self.pts[b] - d;
        let cd = self.pts[c] - d;
        let (la, lb, lc) = (ad.norm2(), bd.norm2(), cd.norm2());
        let det = la * bd.cross(cd) + lb * cd.cross(ad) + lc * ad.cross(bd);
        let mag = la * ((bd.x * cd.y).abs() + (bd.y * cd.x).abs())
            + lb * ((cd.x * ad.y).abs() + (cd.y * ad.x).abs())
            + lc * ((ad.x * bd.y).abs() + (ad.y * bd.x).abs());
        det > self.circle_eps * mag
    }

    /// Flips the edge opposite `tri[t][k]` when the quad is convex and the
    /// far vertex lies inside the circumcircle of `t`.
    fn try_flip(&mut self, t: usize, k: usize) -> bool {
        let u = self.nbr[t][k];
        if u == NONE {
            return false;
        }
        let [p, a, b] = [self.tri[t][k], self.tri[t][(k + 1) % 3], self.tri[t][(k + 2) % 3]];
        let j = (0..3).find(|&j| self.nbr[u][j] == t).expect("mutual adjacency");
        let d = self.tri[u][j];
        if !self.in_circle(p, a, b, d) {
            return false;
        }
        let (pp, pa, pb, pd) = (self.pts[p], self.pts[a], self.pts[b], self.pts[d]);
        if !(orient(pp, pa, pd) > T::zero() && orient(pd, pb, pp) > T::zero()) {
            return false;
        }
        let t_a = self.nbr[t][(k + 1) % 3];
        let t_b = self.nbr[t][(k + 2) % 3];
        let u_b = self.nbr[u][(j + 1) % 3];
        let u_a = self.nbr[u][(j + 2) % 3];
        self.set_tri(t, [p, a, d], [u_b, u, t_b]);
        self.set_tri(u, [d, b, p], [t_a, t, u_a]);
        self.replace_nbr(u_b, u, t);
        self.replace_nbr(t_a, t, u);
        true
    }

    fn legalize(&mut self, t: usize, k: usize) {
        let mut stack = vec![(t, k)];
        while let Some((t, k)) = stack.pop() {
            if self.try_flip(t, k) {
                stack.push((t, 0));
                stack.push((self.nbr[t][1], 2));
            }
        }
    }

    fn split_triangle(&mut self, t: usize, ip: usize) {
        let [a, b, c] = self.tri[t];
        let [na, nb, nc] = self.nbr[t];
        let t1 = self.tri.len();
        let t2 = t1 + 1;
        self.set_tri(t, [a, b, ip], [t1, t2, nc]);
        self.new_tri([b, c, ip], [t2, t, na]);
        self.new_tri([c, a, ip], [t, t1, nb]);
        self.replace_nbr(na, t, t1);
        self.replace_nbr(nb, t, t2);
        self.legalize(t, 2);
        self.legalize(t1, 2);
        self.legalize(t2, 2);
    }

    /// Splits the edge opposite `tri[t][i]` at the new point `ip`.
    fn split_edge(&mut self, t: usize, i: usize, ip: usize) {
        let v = self.tri[t];
        let (c, a, b) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
        let u = self.nbr[t][i];
        let n_a = self.nbr[t][(i + 1) % 3];
        let n_b = self.nbr[t][(i + 2) % 3];
        let t2 = self.tri.len();
        if u == NONE {
            self.set_tri(t, [c, a, ip], [NONE, t2, n_b]);
            self.new_tri([c, ip, b], [NONE, n_a, t]);
            self.replace_nbr(n_a, t, t2);
            self.legalize(t, 2);
            self.legalize(t2, 1);
            return;
        }
        let j = (0..3).find(|&j| self.nbr[u][j] == t).expect("mutual adjacency");
        let d = self.tri[u][j];
        let m_b = self.nbr[u][(j + 1) % 3];
        let m_a = self.nbr[u][(j + 2) % 3];
        let u2 = t2 + 1;
        self.set_tri(t, [c, a, ip], [u2, t2, n_b]);
        self.new_tri([c, ip, b], [u, n_a, t]);
        self.replace_nbr(n_a, t, t2);
        self.set_tri(u, [d, b, ip], [t2, u2, m_a]);
        self.new_tri([d, ip, a], [t, m_b, u]);
        self.replace_nbr(m_b, u, u2);
        self.legalize(t, 2);
        self.legalize(t2, 1);
        self.legalize(u, 2);
        self.legalize(u2, 1);
    }

    fn classify(&self, t: usize, p: Point2<T>) -> Loc {
        let v = self.tri[t];
        if v.iter().any(|&x| self.pts[x].dist(p) <= self.len_tol * T::lit(16.0)) {
            return Loc::Vertex;
        }
        let mut best = (T::infinity(), 0);
        for k in 0..3 {
            let (a, b) = (self.pts[v[(k + 1) % 3]], self.pts[v[(k + 2) % 3]]);
            let dist = orient(a, b, p) / a.dist(b);
            if dist < best.0 {
                best = (dist, k);
            }
        }
        if best.0 <= self.len_tol {
            Loc::OnEdge(t, best.1)
        } else {
            Loc::Inside(t)
        }
    }

    /// Visibility walk from `start`.
    fn locate(&self, p: Point2<T>, start: usize) -> Loc {
        let mut t = if start < self.tri.len() { start } else { self.last };
        let max_steps = 4 * self.tri.len() + 64;
        for step in 0..max_steps {
            let v = self.tri[t];
            let mut next = None;
            for r in 0..3 {
                let k = (r + step) % 3;
                let (a, b) = (self.pts[v[(k + 1) % 3]], self.pts[v[(k + 2) % 3]]);
                if orient(a, b, p) < -self.len_tol * a.dist(b) {
                    next = Some(k);
                    break;
                }
            }
            match next {
                None => return self.classify(t, p),
                Some(k) if self.nbr[t][k] == NONE => return Loc::Outside(t, k),
                Some(k) => t = self.nbr[t][k],
            }
        }
        self.locate_brute(p)
    }

    fn locate_brute(&self, p: Point2<T>) -> Loc {
        let mut worst = (T::neg_infinity(), 0, 0);
        for (t, v) in self.tri.iter().enumerate() {
            let mut min_d = T::infinity();
            let mut min_k = 0;
            for k in 0..3 {
                let (a, b) = (self.pts[v[(k + 1) % 3]], self.pts[v[(k + 2) % 3]]);
                let dist = orient(a, b, p) / a.dist(b);
                if dist < min_d {
                    min_d = dist;
                    min_k = k;
                }
            }
            if min_d >= -self.len_tol {
                return self.classify(t, p);
            }
            if min_d > worst.0 {
                worst = (min_d, t, min_k);
            }
        }
        // Outside: report a boundary edge the point lies beyond.
        for (t, n) in self.nbr.iter().enumerate() {
            for k in 0..3 {
                if n[k] == NONE {
                    let v = self.tri[t];
                    let (a, b) = (self.pts[v[(k + 1) % 3]], self.pts[v[(k + 2) % 3]]);
                    let s = (p - a).dot(b - a) / (b - a).norm2();
                    if orient(a, b, p) < T::zero() && s >= T::zero() && s <= T::one() {
                        return Loc::Outside(t, k);
                    }
                }
            }
        }
        Loc::Outside(worst.1, worst.2)
    }

    /// Inserts an interior point; returns `false` if it duplicates a node or
    /// falls outside.
    fn insert_interior(&mut self, p: Point2<T>, hint: usize) -> bool {
        match self.locate(p, hint) {
            Loc::Inside(t) => {
                let ip = self.add_point(p, NONE);
                self.split_triangle(t, ip);
                true
            }
            Loc::OnEdge(t, k) if self.nbr[t][k] != NONE => {
                let ip = self.add_point(p, NONE);
                self.split_edge(t, k, ip);
                true
            }
            _ => false,
        }
    }

    fn around(&self, v: usize) -> Vec<usize> {
        let mut t0 = self.vtri[v];
        if t0 == NONE || t0 >= self.tri.len() || !self.tri[t0].contains(&v) {
            match self.tri.iter().position(|x| x.contains(&v)) {
                Some(t) => t0 = t,
                None => return Vec::new(),
            }
        }
        let mut out = vec![t0];
        let mut i = 0;
        while i < out.len() {
            let t = out[i];
            i += 1;
            for &u in &self.nbr[t] {
                if u != NONE && self.tri[u].contains(&v) && !out.contains(&u) {
                    out.push(u);
                }
            }
        }
        out
    }

    /// Triangle and local index of the boundary edge running `a → b`.
    fn find_boundary_edge(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        for t in self.around(a) {
            for k in 0..3 {
                if self.nbr[t][k] == NONE && self.tri[t][(k + 1) % 3] == a && self.tri[t][(k + 2) % 3] == b {
                    return Some((t, k));
                }
            }
        }
        None
    }

    fn segment_edge_id(&self, a: usize, b: usize) -> usize {
        if self.on_edge[a] != NONE {
            return self.on_edge[a];
        }
        if self.on_edge[b] != NONE {
            return self.on_edge[b];
        }
        // Both are corners; a CCW boundary edge runs from corner i to i + 1.
        self.corner_of[a]
    }

    fn is_acute_corner(&self, v: usize) -> bool {
        self.corner_of[v] != NONE && self.corner_angle[v] < T::FRAC_PI_2() - T::lit(1e-6)
    }

    /// Midpoint, or a power-of-two shell around an acute corner endpoint.
    fn split_point(&self, a: usize, b: usize) -> Point2<T> {
        let (pa, pb) = (self.pts[a], self.pts[b]);
        let len = pa.dist(pb);
        let (apex, other) = if self.is_acute_corner(a) {
            (pa, pb)
        } else if self.is_acute_corner(b) {
            (pb, pa)
        } else {
            return pa.lerp(pb, T::lit(0.5));
        };
        let d = T::lit(2.0).powf((len * T::lit(0.5)).log2().round());
        let s = d / len;
        if s > T::lit(0.3) && s < T::lit(0.7) {
            apex.lerp(other, s)
        } else {
            pa.lerp(pb, T::lit(0.5))
        }
    }

    fn split_segment(&mut self, a: usize, b: usize) -> bool {
        let Some((t, k)) = self.find_boundary_edge(a, b) else {
            return false;
        };
        let p = self.split_point(a, b);
        let e = self.segment_edge_id(a, b);
        let ip = self.add_point(p, e);
        self.split_edge(t, k, ip);
        true
    }

    fn encroached(&self, t: usize, k: usize) -> bool {
        let v = self.tri[t];
        let (c, a, b) = (self.pts[v[k]], self.pts[v[(k + 1) % 3]], self.pts[v[(k + 2) % 3]]);
        (a - c).dot(b - c) < -T::lit(1e-10) * a.dist(b).powi(2)
    }

    fn circumcenter(&self, t: usize) -> Point2<T> {
        let [a, b, c] = self.tri[t].map(|x| self.pts[x]);
        let (ba, ca) = (b - a, c - a);
        let d = T::lit(2.0) * ba.cross(ca);
        let (lb, lc) = (ba.norm2(), ca.norm2());
        a + Point2::new(ca.y * lb - ba.y * lc, ba.x * lc - ca.x * lb) * (T::one() / d)
    }

    /// Triangle angles in radians, indexed like its vertices.
    fn angles(&self, t: usize) -> [T; 3] {
        let v = self.tri[t].map(|x| self.pts[x]);
        let mut out = [T::zero(); 3];
        for k in 0..3 {
            let (u, w) = (v[(k + 1) % 3] - v[k], v[(k + 2) % 3] - v[k]);
            out[k] = u.cross(w).abs().atan2(u.dot(w));
        }
        out
    }

    fn sharp_corner(&self, v: usize) -> bool {
        self.corner_of[v] != NONE && self.corner_angle[v] < T::lit(SHARP_CORNER_DEG.to_radians())
    }

    /// Skinny triangles forced by a sharp input corner: the smallest angle sits
    /// on the corner itself, or the shortest edge joins the two sides of a
    /// sharp corner at (nearly) equal distance from it.
    pub(crate) fn exempt_from_angle(&self, t: usize) -> bool {
        let ang = self.angles(t);
        let v = self.tri[t];
        let kmin = (0..3).min_by(|&i, &j| ang[i].partial_cmp(&ang[j]).unwrap()).unwrap();
        if self.sharp_corner(v[kmin]) {
            return true;
        }
        let (u, w) = (v[(kmin + 1) % 3], v[(kmin + 2) % 3]);
        let (eu, ew) = (self.on_edge[u], self.on_edge[w]);
        if eu == NONE || ew == NONE || eu == ew {
            return false;
        }
        let n = self.n_corners;
        let corner = if (eu + 1) % n == ew {
            ew
        } else if (ew + 1) % n == eu {
            eu
        } else {
            return false;
        };
        if !self.sharp_corner(corner) {
            return false;
        }
        let (du, dw) = (self.pts[u].dist(self.pts[corner]), self.pts[w].dist(self.pts[corner]));
        (du - dw).abs() <= T::lit(1e-6) * du.max(dw)
    }

    fn refine(&mut self, h: T, opts: &MeshOptions, floor: T) -> Result<()> {
        let min_angle = T::lit(opts.min_angle_deg.to_radians());
        let max_r = T::lit(opts.size_factor) * h;
        let mut segq: VecDeque<(usize, usize)> = VecDeque::new();
        let mut triq: VecDeque<(usize, [usize; 3])> = VecDeque::new();
        self.touched = (0..self.tri.len()).collect();

        loop {
            for t in std::mem::take(&mut self.touched) {
                triq.push_back((t, self.tri[t]));
                for k in 0..3 {
                    if self.nbr[t][k] == NONE && self.encroached(t, k) {
                        segq.push_back((self.tri[t][(k + 1) % 3], self.tri[t][(k + 2) % 3]));
                    }
                }
            }
            if self.pts.len() > opts.max_nodes {
                return Err(Error::MeshTooLarge {
                    target_h: h.to_f64_lossy(),
                    required: self.pts.len(),
                    cap: opts.max_nodes,
                });
            }
            if let Some((a, b)) = segq.pop_front() {
                if let Some((t, k)) = self.find_boundary_edge(a, b) {
                    if self.encroached(t, k) && self.pts[a].dist(self.pts[b]) > floor {
                        self.split_segment(a, b);
                    }
                }
                continue;
            }
            let Some((t, v)) = triq.pop_front() else { break };
            if self.tri[t] != v || !self.is_bad(t, min_angle, max_r, floor) {
                continue;
            }
            let cc = self.circumcenter(t);
            match self.locate(cc, t) {
                Loc::Vertex => {}
                Loc::Outside(t2, k2) => {
                    let (a, b) = (self.tri[t2][(k2 + 1) % 3], self.tri[t2][(k2 + 2) % 3]);
                    if self.pts[a].dist(self.pts[b]) > floor {
                        self.split_segment(a, b);
                    }
                }
                Loc::Inside(t2) | Loc::OnEdge(t2, _) => {
                    let enc = self.cavity_encroachment(t2, cc);
                    if !enc.is_empty() {
                        for (a, b) in enc {
                            if self.pts[a].dist(self.pts[b]) > floor {
                                self.split_segment(a, b);
                            }
                        }
                    } else {
                        self.insert_interior(cc, t2);
                    }
                }
            }
            if self.tri[t] == v && !self.touched.is_empty() {
                triq.push_back((t, v));
            }
        }
        Ok(())
    }

    fn is_bad(&self, t: usize, min_angle: T, max_r: T, floor: T) -> bool {
        let [a, b, c] = self.tri[t].map(|x| self.pts[x]);
        let (la, lb, lc) = (b.dist(c), c.dist(a), a.dist(b));
        if la.min(lb).min(lc) <= floor {
            return false;
        }
        let area2 = orient(a, b, c);
        let r = la * lb * lc / (T::lit(2.0) * area2);
        if r > max_r {
            return true;
        }
        let ang = self.angles(t);
        ang[0].min(ang[1]).min(ang[2]) < min_angle && !self.exempt_from_angle(t)
    }

    /// Boundary subsegments whose diametral circle contains `p`, among those
    /// bounding the Bowyer–Watson cavity of `p`.
    fn cavity_encroachment(&self, t0: usize, p: Point2<T>) -> Vec<(usize, usize)> {
        let mut cavity = vec![t0];
        let mut out = Vec::new();
        let mut i = 0;
        while i < cavity.len() && cavity.len() < 256 {
            let t = cavity[i];
            i += 1;
            let v = self.tri[t];
            for k in 0..3 {
                let u = self.nbr[t][k];
                let (a, b) = (v[(k + 1) % 3], v[(k + 2) % 3]);
                if u == NONE {
                    let (pa, pb) = (self.pts[a], self.pts[b]);
                    let mid = pa.lerp(pb, T::lit(0.5));
                    if p.dist(mid) < T::lit(0.5) * pa.dist(pb) {
                        out.push((a, b));
                    }
                } else if !cavity.contains(&u) {
                    let [x, y, z] = self.tri[u];
                    if self.in_circle_pt(x, y, z, p) {
                        cavity.push(u);
                    }
                }
            }
        }
        out
    }
}

/// Builds the refined triangulation. Returns nodes, triangles and boundary flags.
pub(crate) fn build<T: Real>(
    d: &ConvexDomain<T>,
    h: T,
    opts: &MeshOptions,
) -> Result<(Vec<Point2<T>>, Vec<[usize; 3]>, Vec<bool>)> {
    let mut b = Builder::new(d);
    let n = d.len();
    let min_edge = d.edges().map(|(a, c)| a.dist(c)).fold(T::infinity(), T::min);
    let floor = T::lit(1e-3) * h.min(min_edge);

    for i in 0..n {
        let (pa, pb) = d.edge(i);
        let m = (pa.dist(pb) / h).ceil().to_usize().unwrap_or(1).max(1);
        let end = (i + 1) % n;
        let mut prev = i;
        for j in 1..m {
            let s = T::from_usize_lossy(j) / T::from_usize_lossy(m);
            let Some((t, k)) = b.find_boundary_edge(prev, end) else {
                return Err(Error::DegenerateDomain("boundary edge lost during insertion".into()));
            };
            let ip = b.add_point(pa.lerp(pb, s), i);
            b.split_edge(t, k, ip);
            prev = ip;
        }
    }

    // Hexagonal lattice, rows traversed in alternating directions so that
    // consecutive points are neighbours and the walk stays short.
    let (lo, hi) = d.bbox();
    let dy = h * T::lit(3f64.sqrt() * 0.5);
    let keep = h * T::lit(0.5);
    let rows = ((hi.y - lo.y) / dy).floor().to_usize().unwrap_or(0);
    for j in 1..=rows {
        let y = lo.y + dy * T::from_usize_lossy(j);
        let shift = if j % 2 == 1 { h * T::lit(0.5) } else { T::zero() };
        let mut row: Vec<Point2<T>> = Vec::new();
        let mut x = lo.x + shift;
        while x < hi.x {
            let p = Point2::new(x, y);
            if d.distance_to_boundary(p) >= keep {
                row.push(p);
            }
            x += h;
        }
        if j % 2 == 0 {
            row.reverse();
        }
        for p in row {
            let hint = b.last;
            b.insert_interior(p, hint);
        }
    }
    b.refine(h, opts, floor)?;
    Ok((b.pts, b.tri, b.boundary))
}
