//! Reflected Brownian motion in convex polygons and the Monte Carlo checks
//! built on it.

mod feynman_kac;
mod hitting;
mod kernel;
mod paths;
mod reflect;
pub mod rng;
mod stationarity;

pub use feynman_kac::{feynman_kac_check, feynman_kac_field, Analytic, Constant, FemField, FeynmanKacReport, ScalarField};
pub use hitting::{fiber, hitting_time_experiment, hitting_times, Barrier, HittingConfig, HittingTimeStats};
pub use kernel::{estimate_heat_kernel, verify_kernel_domination, DominationReport, HeatKernelEstimate, MIN_CELL_COUNT};
pub use paths::{simulate, simulate_snapshots, PathEnsemble, Stepper, MAX_DT_OVER_INRADIUS2};
pub use reflect::{EdgeIndex, StepEvents, MAX_REFLECTIONS};
pub use stationarity::{stationarity_test, stationarity_test_with_dt, StationarityReport, STATIONARITY_DT_OVER_INRADIUS2};
