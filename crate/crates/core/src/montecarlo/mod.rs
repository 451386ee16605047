//! Monte-Carlo estimators for the probabilistic statements of the induction.

pub mod decomposition;
pub mod estimate;
pub mod induction;
pub mod schedule;
pub mod singular;
pub mod stats;

pub use decomposition::{continuity_modulus_probe, shift_covariance_check, xi_eta_decompose, ModulusPoint, ModulusReport, PotentialDecomposition};
pub use estimate::{
    disjoint_count_tail, estimate_pk, estimate_qk, wegner_check, BallSetup, CenterEstimate, DisjointSetup,
    DisjointTailReport, SweepEstimate, WegnerPoint, WegnerReport,
};
pub use induction::{induction_audit, AuditMode, ImplicationViolation, InductionReport, InductionSetup, TrialAudit};
pub use schedule::{parameter_schedule, Framework, ScheduleInputs, ScheduleParams};
pub use singular::{
    coverage_check, singular_set_measure, two_volume_estimate, BoundaryGreen, CoverageOutcome, CoverageReport,
    EnergyInterval, SingularSet, TwoVolumeReport, TwoVolumeSetup,
};
pub use stats::{clopper_pearson, energy_grid, run_trials, EnergySpec, EstimateReport, Quantity, CONFIDENCE};
