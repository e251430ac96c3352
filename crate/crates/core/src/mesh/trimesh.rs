use std::io::Write;

use serde::{Deserialize, Serialize};

use super::delaunay::{build, MeshOptions, SHARP_CORNER_DEG};
use crate::error::{invalid, Error, Result};
use crate::geometry::{inradius_incenter, ConvexDomain};
use crate::point::{orient, Point2};
use crate::scalar::Real;

/// Uniform grid over triangle bounding boxes for point location.
#[derive(Clone, Debug)]
struct Locator<T> {
    origin: Point2<T>,
    cell: T,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl<T: Real> Locator<T> {
    fn new(nodes: &[Point2<T>], tris: &[[usize; 3]], cell: T) -> Self {
        let (mut lo, mut hi) = (nodes[0], nodes[0]);
        for p in nodes {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let dim = |a: T, b: T| ((b - a) / cell).floor().to_usize().unwrap_or(0) + 1;
        let (nx, ny) = (dim(lo.x, hi.x), dim(lo.y, hi.y));
        let mut counts = vec![0u32; nx * ny + 1];
        let range = |t: &[usize; 3]| {
            let (mut a, mut b) = (nodes[t[0]], nodes[t[0]]);
            for &v in &t[1..] {
                a = Point2::new(a.x.min(nodes[v].x), a.y.min(nodes[v].y));
                b = Point2::new(b.x.max(nodes[v].x), b.y.max(nodes[v].y));
            }
            let ix = |x: T, n: usize| (((x - lo.x) / cell).floor().to_usize().unwrap_or(0)).min(n - 1);
            let iy = |y: T, n: usize| (((y - lo.y) / cell).floor().to_usize().unwrap_or(0)).min(n - 1);
            (ix(a.x, nx), ix(b.x, nx), iy(a.y, ny), iy(b.y, ny))
        };
        for t in tris {
            let (x0, x1, y0, y1) = range(t);
            for j in y0..=y1 {
                for i in x0..=x1 {
                    counts[j * nx + i + 1] += 1;
                }
            }
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; counts[nx * ny] as usize];
        for (ti, t) in tris.iter().enumerate() {
            let (x0, x1, y0, y1) = range(t);
            for j in y0..=y1 {
                for i in x0..=x1 {
                    let c = j * nx + i;
                    items[fill[c] as usize] = ti as u32;
                    fill[c] += 1;
                }
            }
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            start: counts,
            items,
        }
    }

    fn candidates(&self, p: Point2<T>) -> &[u32] {
        let fx = ((p.x - self.origin.x) / self.cell).floor();
        let fy = ((p.y - self.origin.y) / self.cell).floor();
        let (Some(i), Some(j)) = (fx.to_isize(), fy.to_isize()) else {
            return &[];
        };
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return &[];
        }
        let c = j as usize * self.nx + i as usize;
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }
}

/// Conforming triangulation of a convex polygon with P1 node data.
#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    nodes: Vec<Point2<T>>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    target_h: T,
    domain: ConvexDomain<T>,
    locator: Locator<T>,
}

/// Quality summary produced by [`TriMesh::audit`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshQuality {
    pub n_nodes: usize,
    pub n_triangles: usize,
    pub min_area: f64,
    /// Over all triangles.
    pub min_angle_deg: f64,
    /// Over triangles not forced skinny by an input corner below 60°.
    pub min_angle_regular_deg: f64,
    pub max_circumradius_over_h: f64,
    pub area_rel_error: f64,
    pub max_boundary_offset: f64,
}

impl<T: Real> TriMesh<T> {
    /// Assembles a mesh from raw parts; triangles must be counterclockwise.
    pub fn from_parts(
        domain: ConvexDomain<T>,
        nodes: Vec<Point2<T>>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
        target_h: T,
    ) -> Result<Self> {
        if nodes.len() != boundary.len() || triangles.is_empty() {
            return Err(invalid("mesh", "inconsistent node and triangle arrays"));
        }
        for t in &triangles {
            if t.iter().any(|&v| v >= nodes.len()) || orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]) <= T::zero() {
                return Err(invalid("mesh", "triangle with bad index or non-positive area"));
            }
        }
        let locator = Locator::new(&nodes, &triangles, target_h * T::lit(2.0));
        Ok(Self {
            nodes,
            triangles,
            boundary,
            target_h,
            domain,
            locator,
        })
    }

    pub fn nodes(&self) -> &[Point2<T>] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_node_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn target_h(&self) -> T {
        self.target_h
    }

    pub fn domain(&self) -> &ConvexDomain<T> {
        &self.domain
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2<T>; 3] {
        self.triangles[t].map(|v| self.nodes[v])
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangle_points(t);
        orient(a, b, c) * T::lit(0.5)
    }

    pub fn triangle_centroid(&self, t: usize) -> Point2<T> {
        let [a, b, c] = self.triangle_points(t);
        (a + b + c) * (T::one() / T::lit(3.0))
    }

    pub fn total_area(&self) -> T {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Unique undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Node adjacency lists, sorted.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, j) in self.edges() {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn barycentric(&self, t: usize, p: Point2<T>) -> [T; 3] {
        let [a, b, c] = self.triangle_points(t);
        let area = orient(a, b, c);
        let l0 = orient(p, b, c) / area;
        let l1 = orient(a, p, c) / area;
        [l0, l1, T::one() - l0 - l1]
    }

    /// Containing triangle and barycentric coordinates of `p`.
    ///
    /// Points within `1e-9` (relative to the domain scale) outside the polygon
    /// are first projected onto it.
    pub fn locate(&self, p: Point2<T>) -> Result<(usize, [T; 3])> {
        let outside = || Error::OutsideDomain {
            x: p.x.to_f64_lossy(),
            y: p.y.to_f64_lossy(),
        };
        let tol = T::lit(1e-9).max(T::geom_tol(self.domain.coord_scale())) * self.domain.coord_scale().max(T::one());
        let q = if self.domain.contains(p) {
            p
        } else if self.domain.contains_tol(p, tol) {
            self.domain.project(p)
        } else {
            return Err(outside());
        };
        let mut best: Option<(T, usize, [T; 3])> = None;
        for &t in self.locator.candidates(q) {
            let l = self.barycentric(t as usize, q);
            let m = l[0].min(l[1]).min(l[2]);
            if m >= T::zero() {
                return Ok((t as usize, l));
            }
            if best.map_or(true, |b| m > b.0) {
                best = Some((m, t as usize, l));
            }
        }
        match best {
            Some((m, t, l)) if m >= -T::lit(1e-9).max(T::epsilon() * T::lit(1e3)) => Ok((t, l)),
            _ => Err(outside()),
        }
    }

    /// P1 interpolation of nodal `values` at `p`.
    pub fn interpolate(&self, values: &[T], p: Point2<T>) -> Result<T> {
        let (t, l) = self.locate(p)?;
        let v = self.triangles[t];
        Ok(l[0] * values[v[0]] + l[1] * values[v[1]] + l[2] * values[v[2]])
    }

    pub fn audit(&self) -> MeshQuality {
        let sharp = SHARP_CORNER_DEG.to_radians();
        let corner_angle = |p: Point2<T>| -> Option<f64> {
            let tol = T::geom_tol(self.domain.coord_scale());
            (0..self.domain.len())
                .find(|&i| self.domain.vertex(i).dist(p) <= tol)
                .map(|i| self.domain.interior_angle(i).to_f64_lossy())
        };
        let mut min_area = f64::INFINITY;
        let mut min_all = f64::INFINITY;
        let mut min_reg = f64::INFINITY;
        let mut max_r = 0.0f64;
        let h = self.target_h.to_f64_lossy();
        for (t, tv) in self.triangles.iter().enumerate() {
            let p = self.triangle_points(t).map(|q| (q.x.to_f64_lossy(), q.y.to_f64_lossy()));
            let mut ang = [0.0; 3];
            for k in 0..3 {
                let (u, w) = (
                    (p[(k + 1) % 3].0 - p[k].0, p[(k + 1) % 3].1 - p[k].1),
                    (p[(k + 2) % 3].0 - p[k].0, p[(k + 2) % 3].1 - p[k].1),
                );
                ang[k] = (u.0 * w.1 - u.1 * w.0).abs().atan2(u.0 * w.0 + u.1 * w.1);
            }
            let len = |i: usize, j: usize| ((p[i].0 - p[j].0).powi(2) + (p[i].1 - p[j].1).powi(2)).sqrt();
            let area = self.triangle_area(t).to_f64_lossy();
            min_area = min_area.min(area);
            max_r = max_r.max(len(0, 1) * len(1, 2) * len(2, 0) / (4.0 * area) / h);
            let kmin = (0..3).min_by(|&i, &j| ang[i].total_cmp(&ang[j])).unwrap();
            let amin = ang[kmin].to_degrees();
            min_all = min_all.min(amin);
            // Skinny triangles wedged into a sharp corner are unavoidable.
            let wedge = tv.iter().any(|&v| corner_angle(self.nodes[v]).is_some_and(|a| a < sharp));
            if !wedge {
                min_reg = min_reg.min(amin);
            }
        }
        let area = self.total_area().to_f64_lossy();
        let exact = self.domain.area().to_f64_lossy();
        let max_boundary_offset = self
            .nodes
            .iter()
            .zip(&self.boundary)
            .filter(|(_, &b)| b)
            .map(|(p, _)| self.domain.distance_to_boundary(*p).abs().to_f64_lossy())
            .fold(0.0, f64::max);
        MeshQuality {
            n_nodes: self.nodes.len(),
            n_triangles: self.triangles.len(),
            min_area,
            min_angle_deg: min_all,
            min_angle_regular_deg: min_reg,
            max_circumradius_over_h: max_r,
            area_rel_error: (area - exact).abs() / exact,
            max_boundary_offset,
        }
    }

    /// Node table: `index,x,y,boundary`.
    pub fn write_nodes_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,x,y,boundary")?;
        for (i, (p, b)) in self.nodes.iter().zip(&self.boundary).enumerate() {
            writeln!(
                w,
                "{i},{},{},{}",
                crate::fmt_f64(p.x.to_f64_lossy()),
                crate::fmt_f64(p.y.to_f64_lossy()),
                u8::from(*b)
            )?;
        }
        Ok(())
    }

    /// Triangle table: `index,a,b,c` (counterclockwise node indices).
    pub fn write_triangles_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,a,b,c")?;
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(w, "{i},{},{},{}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Quality triangulation with default [`MeshOptions`].
pub fn triangulate<T: Real>(domain: &ConvexDomain<T>, target_h: T) -> Result<TriMesh<T>> {
    triangulate_with(domain, target_h, &MeshOptions::default())
}

/// Delaunay refinement of `domain` to edge length about `target_h`.
///
/// Requires `0 < target_h ≤ inradius`. Fails with [`Error::MeshTooLarge`]
/// when the estimated or actual node count exceeds `opts.max_nodes`.
pub fn triangulate_with<T: Real>(domain: &ConvexDomain<T>, target_h: T, opts: &MeshOptions) -> Result<TriMesh<T>> {
    let (inrad, _) = inradius_incenter(domain)?;
    if !(target_h > T::zero()) || target_h > inrad * (T::one() + T::lit(1e-9)) {
        return Err(invalid(
            "h",
            format!("must lie in (0, inradius = {}], got {}", inrad, target_h),
        ));
    }
    let area = domain.area().to_f64_lossy();
    let h = target_h.to_f64_lossy();
    let estimate = (1.16 * area / (h * h) + domain.perimeter().to_f64_lossy() / h) as usize;
    if estimate > opts.max_nodes {
        return Err(Error::MeshTooLarge {
            target_h: h,
            required: estimate,
            cap: opts.max_nodes,
        });
    }
    let (nodes, tris, boundary) = build(domain, target_h, opts)?;
    TriMesh::from_parts(domain.clone(), nodes, tris, boundary, target_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn unit_square_coarse() {
        let sq = ConvexDomain::<f64>::rectangle(1.0, 1.0).unwrap();
        let m = triangulate(&sq, 0.5).unwrap();
        let q = m.audit();
        assert!(q.area_rel_error < 1e-9, "{q:?}");
        assert!(q.min_angle_deg >= 20.0, "{q:?}");
    }

    #[test]
    fn rectangle_node_count() {
        let r = ConvexDomain::<f64>::rectangle(10.0, 1.0).unwrap();
        let m = triangulate(&r, 0.1).unwrap();
        let q = m.audit();
        assert!((1000..=8000).contains(&q.n_nodes), "{q:?}");
        assert!(q.min_angle_deg >= 20.0 && q.area_rel_error < 1e-9, "{q:?}");
        assert!(q.max_boundary_offset < 1e-12);
    }

    #[test]
    fn disk_quality() {
        let d = DomainSpec::disk(1.0).build().unwrap();
        let m = triangulate(&d, 0.05).unwrap();
        let q = m.audit();
        assert!(q.min_angle_deg >= 20.0, "{q:?}");
        assert!(q.max_circumradius_over_h <= 0.8 + 1e-9, "{q:?}");
    }

    #[test]
    fn locate_round_trip() {
        let d = DomainSpec::ellipse(3.0, 1.0).build().unwrap();
        let m = triangulate(&d, 0.2).unwrap();
        for t in 0..m.n_triangles() {
            let c = m.triangle_centroid(t);
            let (_, l) = m.locate(c).unwrap();
            let [a, b, cc] = m.triangle_points(m.locate(c).unwrap().0);
            let back = a * l[0] + b * l[1] + cc * l[2];
            assert!(back.dist(c) < 1e-12);
        }
        for (i, &p) in m.nodes().iter().enumerate() {
            let vals: Vec<f64> = (0..m.n_nodes()).map(|k| if k == i { 1.0 } else { 0.0 }).collect();
            assert!((m.interpolate(&vals, p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(m.locate(Point2::new(10.0, 0.0)).is_err());
    }

    #[test]
    fn f32_mesh() {
        let r = ConvexDomain::<f32>::rectangle(4.0, 1.0).unwrap();
        let m = triangulate(&r, 0.1).unwrap();
        let q = m.audit();
        assert!(q.area_rel_error < 1e-5 && q.min_angle_deg >= 20.0, "{q:?}");
    }

    #[test]
    fn rejects_bad_h_and_caps() {
        let sq = ConvexDomain::<f64>::rectangle(1.0, 1.0).unwrap();
        assert!(triangulate(&sq, 0.0).is_err());
        assert!(triangulate(&sq, 0.9).is_err());
        let opts = MeshOptions { max_nodes: 100, ..Default::default() };
        match triangulate_with(&sq, 0.01, &opts) {
            Err(Error::MeshTooLarge { required, cap, .. }) => assert!(required > cap),
            other => panic!("{other:?}"),
        }
    }
}
