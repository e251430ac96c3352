//! Drivers that run the verifications over domains and families and
//! collect self-auditing reports.

mod family;
mod gaussian;
mod lemma4;
mod report;
mod scaling;
mod solve;
mod sweep;
mod theorem;
mod verify;

pub use family::{build_family, domain_family, FamilySpec};
pub use gaussian::{fit_envelopes, fit_gaussian_bounds, kernel_samples, GaussianBoundFit, GaussianSample};
pub use lemma4::{plateau_fit, verify_lemma4, verify_nodal_width, PlateauFit, LEMMA4_MIN_ASPECT};
pub use report::{write_reports_csv, Check, LemmaId, Relation, VerificationReport, SWEEP_CSV_HEADER};
pub use scaling::{eigenvalue_scaling, scaling_report, verify_volume_comparability, volume_ratios, ScalingEntry, VolumeRatios};
pub use solve::{solve_in_place, solve_normalized, SolveSummary, SolvedDomain, EIGEN_TOL};
pub use sweep::{run_sweep, Skipped, SweepConfig, SweepOutput};
pub use theorem::{main_theorem_fit, verify_main_theorem, MainTheoremFit, MainTheoremOptions};
pub use verify::{theorem1_report, verify_hitting_time, verify_lemma1, verify_lemma3};
