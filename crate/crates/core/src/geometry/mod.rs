//! Convex polygon computations.

mod ball;
mod calipers;
mod chebyshev;
mod domain;
mod hull;
mod normalize;
mod spec;

pub use ball::{ball_volume, polygon_disk_area};
pub use calipers::{
    all_diameter_pairs, antipodal_pairs, cluster_pairs, diameter, diameter_indices, edge_widths, min_width,
    verify_diameter_clustering, width_along, ClusteringReport, DiameterPair, DiameterPairSet,
};
pub use chebyshev::inradius_incenter;
pub use domain::{segment_distance, ConvexDomain, Provenance};
pub use hull::convex_hull;
pub use normalize::{normalize, NormalizationReport};
pub use spec::{DomainSpec, Shape, DEFAULT_POLYGONALIZATION_K};
