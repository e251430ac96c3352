//! Normalize, mesh and solve in one call.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{normalize, ConvexDomain, NormalizationReport};
use crate::mesh::{triangulate, TriMesh};
use crate::spectral::{solve_mesh, EigenPair};

/// Residual tolerance used by the experiment drivers.
pub const EIGEN_TOL: f64 = 1e-8;

/// A domain in normalized position with its mesh and first eigenpair.
#[derive(Clone, Debug)]
pub struct SolvedDomain {
    pub domain: ConvexDomain<f64>,
    pub normalization: NormalizationReport<f64>,
    pub mesh: TriMesh<f64>,
    pub pair: EigenPair<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub mu1: f64,
    pub mu2: f64,
    pub residual: f64,
    pub multiplicity_flag: bool,
    pub iterations: usize,
    pub n_nodes: usize,
    pub n_triangles: usize,
    pub target_h: f64,
}

impl SolvedDomain {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            mu1: self.pair.mu1,
            mu2: self.pair.mu2,
            residual: self.pair.residual,
            multiplicity_flag: self.pair.multiplicity_flag,
            iterations: self.pair.iterations,
            n_nodes: self.mesh.n_nodes(),
            n_triangles: self.mesh.n_triangles(),
            target_h: self.mesh.target_h(),
        }
    }
}

/// Mesh size `h` is in normalized units (inradius 1).
pub fn solve_normalized(domain: &ConvexDomain<f64>, h: f64) -> Result<SolvedDomain> {
    let (nd, rep) = normalize(domain)?;
    solve_as_is(nd, rep, h)
}

/// Solves on `domain` without moving it; the normalization report is still computed.
pub fn solve_in_place(domain: &ConvexDomain<f64>, h: f64) -> Result<SolvedDomain> {
    let (_, rep) = normalize(domain)?;
    solve_as_is(domain.clone(), rep, h)
}

fn solve_as_is(domain: ConvexDomain<f64>, normalization: NormalizationReport<f64>, h: f64) -> Result<SolvedDomain> {
    let mesh = triangulate(&domain, h)?;
    let pair = solve_mesh(&mesh, EIGEN_TOL)?;
    Ok(SolvedDomain { domain, normalization, mesh, pair })
}
