//! Heat-kernel histograms on mesh cells and the kernel domination ratio.

use serde::{Deserialize, Serialize};

use super::paths::{check_start, simulate_snapshots, PathEnsemble};
use crate::error::{invalid, Error, Result};
use crate::geometry::ConvexDomain;
use crate::mesh::TriMesh;
use crate::Point;

/// Minimum count for a cell to enter ratio and fit computations.
pub const MIN_CELL_COUNT: u64 = 20;

/// Empirical transition density `p_t(source, ·)` on the triangles of a mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatKernelEstimate {
    pub source: Point,
    pub time: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub counts: Vec<u64>,
    /// `counts / (n_paths · cell_areas)`.
    pub density: Vec<f64>,
    pub cell_areas: Vec<f64>,
    pub cell_centers: Vec<Point>,
}

impl HeatKernelEstimate {
    /// Histogram of an ensemble's endpoints over the mesh triangles.
    pub fn from_ensemble(mesh: &TriMesh<f64>, ens: &PathEnsemble) -> Result<Self> {
        let nt = mesh.n_triangles();
        let mut counts = vec![0u64; nt];
        for &p in &ens.endpoints {
            counts[mesh.locate(p)?.0] += 1;
        }
        let cell_areas: Vec<f64> = (0..nt).map(|t| mesh.triangle_area(t)).collect();
        let n = ens.n_paths as f64;
        let density = counts.iter().zip(&cell_areas).map(|(&c, &a)| c as f64 / (n * a)).collect();
        Ok(Self {
            source: ens.start,
            time: ens.t_final,
            dt: ens.dt,
            n_paths: ens.n_paths,
            seed: ens.rng_seed,
            counts,
            density,
            cell_areas,
            cell_centers: (0..nt).map(|t| mesh.triangle_centroid(t)).collect(),
        })
    }

    /// Total mass; equals one for every estimate.
    pub fn mass(&self) -> f64 {
        self.density.iter().zip(&self.cell_areas).map(|(d, a)| d * a).sum()
    }
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths < 10_000 {
        return Err(invalid("n_paths", format!("kernel estimates need at least 1e4 paths, got {n_paths}")));
    }
    Ok(())
}

/// Estimates `p_t(source, ·)` at each of `times` from one set of paths.
pub fn estimate_heat_kernel(
    domain: &ConvexDomain<f64>,
    mesh: &TriMesh<f64>,
    source: Point,
    times: &[f64],
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<HeatKernelEstimate>> {
    check_paths(n_paths)?;
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("t", "kernel times must be positive"));
    }
    let ens = simulate_snapshots(domain, source, times, dt, n_paths, seed)?;
    ens.iter().map(|e| HeatKernelEstimate::from_ensemble(mesh, e)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominationReport {
    pub x: Point,
    pub y: Point,
    pub delta: f64,
    pub t_ref: f64,
    /// Max over admissible cells of `p̂_δ(x, ·) / p̂_{t_ref}(y, ·)`.
    pub c_delta_hat: f64,
    pub sup_ratio_cell: usize,
    pub sup_ratio_center: Point,
    pub cells_used: usize,
    pub n_paths: usize,
}

/// Empirical constant `c` in `p_δ(x, z) ≤ c · p_{t_ref}(y, z)`. Cells enter
/// when the reference histogram holds at least [`MIN_CELL_COUNT`] endpoints.
#[allow(clippy::too_many_arguments)]
pub fn verify_kernel_domination(
    domain: &ConvexDomain<f64>,
    mesh: &TriMesh<f64>,
    x: Point,
    y: Point,
    delta: f64,
    t_ref: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<DominationReport> {
    check_paths(n_paths)?;
    check_start(domain, x)?;
    check_start(domain, y)?;
    if !(delta > 0.0 && delta <= t_ref) {
        return Err(invalid("delta", format!("need 0 < δ ≤ t_ref, got δ = {delta}, t_ref = {t_ref}")));
    }
    let (pd, pr) = if x == y {
        let mut v = estimate_heat_kernel(domain, mesh, x, &[delta, t_ref], n_paths, dt, seed)?;
        let r = v.pop().unwrap();
        (v.pop().unwrap(), r)
    } else {
        let a = estimate_heat_kernel(domain, mesh, x, &[delta], n_paths, dt, seed)?.remove(0);
        let b = estimate_heat_kernel(domain, mesh, y, &[t_ref], n_paths, dt, super::rng::sub_seed(seed, 1))?.remove(0);
        (a, b)
    };
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut used = 0;
    for c in 0..pr.counts.len() {
        if pr.counts[c] >= MIN_CELL_COUNT {
            used += 1;
            let r = pd.density[c] / pr.density[c];
            if r > best.0 {
                best = (r, c);
            }
        }
    }
    if used == 0 {
        return Err(Error::InsufficientCounts { min_count: MIN_CELL_COUNT as usize, n_paths });
    }
    Ok(DominationReport {
        x,
        y,
        delta,
        t_ref,
        c_delta_hat: best.0,
        sup_ratio_cell: best.1,
        sup_ratio_center: pr.cell_centers[best.1],
        cells_used: used,
        n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::triangulate;

    #[test]
    fn histogram_has_unit_mass() {
        let d = ConvexDomain::rectangle(1.0, 1.0).unwrap();
        let m = triangulate(&d, 0.25).unwrap();
        let k = estimate_heat_kernel(&d, &m, Point::new(0.5, 0.5), &[0.01], 10_000, 2e-4, 3).unwrap();
        assert!((k[0].mass() - 1.0).abs() < 1e-12);
        assert_eq!(k[0].counts.iter().sum::<u64>(), 10_000);
    }

    #[test]
    fn too_few_paths() {
        let d = ConvexDomain::rectangle(1.0, 1.0).unwrap();
        let m = triangulate(&d, 0.25).unwrap();
        assert!(estimate_heat_kernel(&d, &m, Point::new(0.5, 0.5), &[0.01], 100, 2e-4, 3).is_err());
    }
}
