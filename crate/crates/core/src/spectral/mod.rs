//! P1 finite elements for the Neumann Laplacian.

mod assemble;
mod dense;
mod eigen;
mod envelope;
mod hotspots;
mod sparse;

pub use assemble::{assemble, element_mass, element_stiffness};
pub use dense::symmetric_eigen;
pub use eigen::{
    apply_sign_convention, solve_first_eigenpair, solve_first_eigenpair_with, solve_mesh, EigenOptions, EigenPair,
    SignConvention, MULTIPLICITY_REL_GAP,
};
pub use envelope::{rcm_order, EnvelopeCholesky};
pub use hotspots::{
    eigen_header_json, hot_spots, nodal_line_report, write_eigen_csv, Extremum, HotSpotSet, NodalLineReport,
    DEFAULT_BAND_EPSILON,
};
pub use sparse::CsrMatrix;
