//! Quality triangulations and P1 point location.

mod delaunay;
mod trimesh;

pub use delaunay::MeshOptions;
pub use trimesh::{triangulate, triangulate_with, MeshQuality, TriMesh};
