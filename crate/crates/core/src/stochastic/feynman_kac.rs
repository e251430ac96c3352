//! Path-average check of `E f(X_t) = e^{−μ t} f(x)` for a Neumann eigenfunction `f`.

use serde::{Deserialize, Serialize};

use super::paths::{check_dt, simulate_snapshots};
use crate::error::{invalid, Result};
use crate::geometry::ConvexDomain;
use crate::mesh::TriMesh;
use crate::spectral::EigenPair;
use crate::Point;

/// A function on the domain.
pub trait ScalarField: Sync {
    fn value(&self, p: Point) -> Result<f64>;
}

/// Constant field; its path average is exact for any sample.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn value(&self, _: Point) -> Result<f64> {
        Ok(self.0)
    }
}

/// Closed-form field.
pub struct Analytic<F>(pub F);

impl<F: Fn(Point) -> f64 + Sync> ScalarField for Analytic<F> {
    fn value(&self, p: Point) -> Result<f64> {
        Ok((self.0)(p))
    }
}

/// Piecewise-linear finite element field.
pub struct FemField<'a> {
    pub mesh: &'a TriMesh<f64>,
    pub values: &'a [f64],
}

impl<'a> FemField<'a> {
    pub fn from_pair(mesh: &'a TriMesh<f64>, pair: &'a EigenPair<f64>) -> Self {
        Self { mesh, values: &pair.phi }
    }
}

impl ScalarField for FemField<'_> {
    fn value(&self, p: Point) -> Result<f64> {
        self.mesh.interpolate(self.values, p)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeynmanKacReport {
    pub start: Point,
    pub t: f64,
    pub mu: f64,
    /// Path average of the field at time `t`.
    pub lhs: f64,
    /// `e^{−μ t}` times the field at the start.
    pub rhs: f64,
    pub stderr: f64,
    pub z_score: f64,
    pub rel_error: f64,
    /// Deterministic error budget `(√dt/r + (h/r)²)·|rhs|`, `r` the inradius.
    pub bias_allowance: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// `|z| ≤ 3`, or the discrepancy is inside `3·stderr + bias_allowance`.
    pub pass: bool,
}

/// Checks the identity at every time in `times` using one set of paths.
/// `h` is the mesh size behind the field (0 for exact fields).
#[allow(clippy::too_many_arguments)]
pub fn feynman_kac_field<F: ScalarField>(
    domain: &ConvexDomain<f64>,
    field: &F,
    mu: f64,
    h: f64,
    start: Point,
    times: &[f64],
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<FeynmanKacReport>> {
    if n_paths < 2 {
        return Err(invalid("n_paths", "need at least two paths for a standard error"));
    }
    let inrad = check_dt(domain, dt)?;
    let f0 = field.value(start)?;
    let ens = simulate_snapshots(domain, start, times, dt, n_paths, seed)?;
    ens.iter()
        .map(|e| {
            let vals = e.endpoints.iter().map(|&p| field.value(p)).collect::<Result<Vec<_>>>()?;
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let stderr = (var / n).sqrt();
            let rhs = (-mu * e.t_final).exp() * f0;
            let diff = mean - rhs;
            let z_score = if stderr > 0.0 {
                diff / stderr
            } else if diff.abs() <= 1e-12 * rhs.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY
            };
            let bias_allowance = (dt.sqrt() / inrad + (h / inrad).powi(2)) * rhs.abs();
            Ok(FeynmanKacReport {
                start,
                t: e.t_final,
                mu,
                lhs: mean,
                rhs,
                stderr,
                z_score,
                rel_error: if rhs != 0.0 { diff.abs() / rhs.abs() } else { diff.abs() },
                bias_allowance,
                n_paths,
                dt,
                seed,
                pass: z_score.abs() <= 3.0 || diff.abs() <= 3.0 * stderr + bias_allowance,
            })
        })
        .collect()
}

/// Feynman–Kac check for a computed eigenpair.
#[allow(clippy::too_many_arguments)]
pub fn feynman_kac_check(
    domain: &ConvexDomain<f64>,
    mesh: &TriMesh<f64>,
    pair: &EigenPair<f64>,
    start: Point,
    times: &[f64],
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<FeynmanKacReport>> {
    let field = FemField::from_pair(mesh, pair);
    feynman_kac_field(domain, &field, pair.mu1, mesh.target_h(), start, times, n_paths, dt, seed)
}
