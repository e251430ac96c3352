//! Neumann eigenpairs, reflected Brownian motion and hot-spot localization
//! on convex planar domains.
//!
//! The deterministic layers ([`geometry`], [`mesh`], [`spectral`]) are generic
//! over [`Real`]; the Monte Carlo and experiment layers work in `f64`.

pub mod error;
pub mod geometry;
pub mod mesh;
pub mod point;
pub mod scalar;
pub mod spectral;
pub mod stochastic;
pub mod experiments;

pub use error::{Error, Result};
pub use point::Point2;
pub use scalar::Real;

pub type Point = Point2<f64>;
pub type Domain = geometry::ConvexDomain<f64>;
pub type Mesh = mesh::TriMesh<f64>;
pub type Pair = spectral::EigenPair<f64>;

/// Fixed float formatting for CSV output: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
