use std::io::Write;

use serde::{Deserialize, Serialize};

use super::eigen::EigenPair;
use crate::error::{invalid, Result};
use crate::mesh::TriMesh;
use crate::point::Point2;
use crate::scalar::Real;

/// One connected component of the extremal band, represented by its
/// extremal node.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extremum<T> {
    pub point: Point2<T>,
    pub value: T,
    pub node: usize,
    pub component_size: usize,
}

/// Global maxima and minima of `φ₁` up to a relative band.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HotSpotSet<T> {
    pub maxima: Vec<Extremum<T>>,
    pub minima: Vec<Extremum<T>>,
    pub band_epsilon: T,
    /// Band nodes plus the points where `φ₁` crosses the band threshold on
    /// mesh edges leaving the band; together they trace the band's closure.
    pub max_band_points: Vec<Point2<T>>,
    pub min_band_points: Vec<Point2<T>>,
}

pub const DEFAULT_BAND_EPSILON: f64 = 1e-3;

fn band<T: Real>(
    mesh: &TriMesh<T>,
    adj: &[Vec<usize>],
    vals: &[T],
    eps: T,
) -> (Vec<Extremum<T>>, Vec<Point2<T>>) {
    let peak = vals.iter().copied().fold(T::neg_infinity(), T::max);
    let cut = if peak > T::zero() {
        peak * (T::one() - eps)
    } else {
        peak * (T::one() + eps)
    };
    let inside: Vec<bool> = vals.iter().map(|&v| v >= cut).collect();
    let nodes = mesh.nodes();
    let mut comp = vec![usize::MAX; vals.len()];
    let mut out = Vec::new();
    for s in 0..vals.len() {
        if !inside[s] || comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        comp[s] = id;
        let (mut best, mut size) = (s, 0);
        while let Some(v) = stack.pop() {
            size += 1;
            if vals[v] > vals[best] || (vals[v] == vals[best] && v < best) {
                best = v;
            }
            for &u in &adj[v] {
                if inside[u] && comp[u] == usize::MAX {
                    comp[u] = id;
                    stack.push(u);
                }
            }
        }
        out.push(Extremum {
            point: nodes[best],
            value: vals[best],
            node: best,
            component_size: size,
        });
    }
    out.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap().then(a.node.cmp(&b.node)));

    let mut pts: Vec<Point2<T>> = (0..vals.len()).filter(|&i| inside[i]).map(|i| nodes[i]).collect();
    for (i, j) in mesh.edges() {
        if inside[i] != inside[j] {
            let (a, b) = if inside[i] { (i, j) } else { (j, i) };
            let s = (vals[a] - cut) / (vals[a] - vals[b]);
            pts.push(nodes[a].lerp(nodes[b], s));
        }
    }
    (out, pts)
}

/// Extremal sets of `φ₁`: nodes with `φ ≥ (1 − ε)·max φ` (and symmetrically
/// for the minimum), grouped into connected components of the mesh graph.
pub fn hot_spots<T: Real>(pair: &EigenPair<T>, mesh: &TriMesh<T>, band_epsilon: T) -> Result<HotSpotSet<T>> {
    if !(band_epsilon >= T::zero() && band_epsilon <= T::lit(0.05)) {
        return Err(invalid("band_epsilon", "must lie in [0, 0.05]"));
    }
    let adj = mesh.adjacency();
    let (maxima, max_band_points) = band(mesh, &adj, &pair.phi, band_epsilon);
    let neg: Vec<T> = pair.phi.iter().map(|&v| -v).collect();
    let (mut minima, min_band_points) = band(mesh, &adj, &neg, band_epsilon);
    for m in &mut minima {
        m.value = -m.value;
    }
    Ok(HotSpotSet {
        maxima,
        minima,
        band_epsilon,
        max_band_points,
        min_band_points,
    })
}

/// Zero level set of `φ₁`, one segment per sign-changing triangle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodalLineReport<T> {
    pub crossing_segments: Vec<[Point2<T>; 2]>,
    /// Triangle index of every segment.
    pub triangles: Vec<usize>,
    pub x_projection_width: T,
    pub x_min: T,
    pub x_max: T,
    /// Gap between the nodal x-interval and the fiber through the maximum.
    pub distance_to_max_fiber: T,
    /// Copied from the eigenpair; the nodal line of a degenerate eigenvalue is
    /// not well defined.
    pub flagged: bool,
}

pub fn nodal_line_report<T: Real>(pair: &EigenPair<T>, mesh: &TriMesh<T>) -> NodalLineReport<T> {
    let phi = &pair.phi;
    let mut segs = Vec::new();
    let mut tris = Vec::new();
    for (t, v) in mesh.triangles().iter().enumerate() {
        let f = v.map(|i| phi[i]);
        let pos = f.iter().any(|&x| x > T::zero());
        let negv = f.iter().any(|&x| x < T::zero());
        if !(pos && negv) {
            continue;
        }
        let p = mesh.triangle_points(t);
        let mut ends: Vec<Point2<T>> = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (k, (k + 1) % 3);
            if f[a] == T::zero() {
                ends.push(p[a]);
            } else if (f[a] > T::zero()) != (f[b] > T::zero()) && f[b] != T::zero() {
                let s = f[a] / (f[a] - f[b]);
                ends.push(p[a].lerp(p[b], s));
            }
        }
        if ends.len() >= 2 {
            segs.push([ends[0], ends[1]]);
            tris.push(t);
        }
    }
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for s in &segs {
        for q in s {
            lo = lo.min(q.x);
            hi = hi.max(q.x);
        }
    }
    let xmax = mesh.nodes()[pair.argmax()].x;
    let gap = if segs.is_empty() {
        T::nan()
    } else if xmax < lo {
        lo - xmax
    } else if xmax > hi {
        xmax - hi
    } else {
        T::zero()
    };
    NodalLineReport {
        x_projection_width: if segs.is_empty() { T::zero() } else { hi - lo },
        x_min: lo,
        x_max: hi,
        crossing_segments: segs,
        triangles: tris,
        distance_to_max_fiber: gap,
        flagged: pair.multiplicity_flag,
    }
}

#[derive(Serialize)]
struct DumpHeader {
    mu1: f64,
    mu2: f64,
    residual: f64,
    multiplicity_flag: bool,
    sign_convention: super::eigen::SignConvention,
    iterations: usize,
    n_nodes: usize,
    target_h: f64,
}

/// Writes `node_x,node_y,phi` rows.
pub fn write_eigen_csv<T: Real, W: Write>(pair: &EigenPair<T>, mesh: &TriMesh<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "node_x,node_y,phi")?;
    for (p, &v) in mesh.nodes().iter().zip(&pair.phi) {
        writeln!(
            w,
            "{},{},{}",
            crate::fmt_f64(p.x.to_f64_lossy()),
            crate::fmt_f64(p.y.to_f64_lossy()),
            crate::fmt_f64(v.to_f64_lossy())
        )?;
    }
    Ok(())
}

/// JSON header accompanying [`write_eigen_csv`].
pub fn eigen_header_json<T: Real>(pair: &EigenPair<T>, mesh: &TriMesh<T>) -> serde_json::Value {
    serde_json::to_value(DumpHeader {
        mu1: pair.mu1.to_f64_lossy(),
        mu2: pair.mu2.to_f64_lossy(),
        residual: pair.residual.to_f64_lossy(),
        multiplicity_flag: pair.multiplicity_flag,
        sign_convention: pair.sign_convention,
        iterations: pair.iterations,
        n_nodes: mesh.n_nodes(),
        target_h: mesh.target_h().to_f64_lossy(),
    })
    .expect("plain struct serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain;
    use crate::mesh::triangulate;
    use crate::spectral::solve_mesh;

    fn rect(n: f64, h: f64) -> (TriMesh<f64>, EigenPair<f64>) {
        let r = ConvexDomain::<f64>::rectangle(n, 1.0).unwrap();
        let mesh = triangulate(&r, h).unwrap();
        let pair = solve_mesh(&mesh, 1e-10).unwrap();
        (mesh, pair)
    }

    #[test]
    fn rectangle_extremal_fibers() {
        let (mesh, pair) = rect(10.0, 0.05);
        let hs = hot_spots(&pair, &mesh, 1e-3).unwrap();
        let peak = pair.max_value();
        for e in &hs.maxima {
            assert!(e.point.x >= 10.0 - 0.05 && e.value >= (1.0 - 1e-3) * peak);
        }
        for e in &hs.minima {
            assert!(e.point.x <= 0.05);
        }
        // cos(πd/10) ≥ 1 − 1e-3 reaches d ≈ 0.142 into the domain.
        let reach = 10.0 * (1.0f64 - 1e-3).acos() / std::f64::consts::PI + 0.05;
        assert!(hs.max_band_points.iter().all(|p| p.x >= 10.0 - reach));
        assert!(hs.min_band_points.iter().all(|p| p.x <= reach));
        assert!(hot_spots(&pair, &mesh, 0.1).is_err());
    }

    #[test]
    fn rectangle_nodal_line() {
        let (mesh, pair) = rect(10.0, 0.05);
        let nl = nodal_line_report(&pair, &mesh);
        assert!(!nl.flagged);
        assert!(nl.x_projection_width <= 0.1, "{}", nl.x_projection_width);
        assert!((nl.x_min - 5.0).abs() < 0.05 && (nl.x_max - 5.0).abs() < 0.05);
        assert!((nl.distance_to_max_fiber - 5.0).abs() < 0.1);
        for &t in &nl.triangles {
            let f = mesh.triangles()[t].map(|i| pair.phi[i]);
            assert!(f.iter().any(|&v| v > 0.0) && f.iter().any(|&v| v < 0.0));
        }
    }

    #[test]
    fn csv_dump() {
        let (mesh, pair) = rect(2.0, 0.25);
        let mut buf = Vec::new();
        write_eigen_csv(&pair, &mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), mesh.n_nodes() + 1);
        let h = eigen_header_json(&pair, &mesh);
        assert_eq!(h["multiplicity_flag"], false);
    }
}
