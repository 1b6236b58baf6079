//! Large-`t` behaviour of harmonic metrics: convergence experiments, rate
//! fits, decay diagnostics and patched approximate solutions.

mod approx;
mod comparison;
mod experiment;
mod rates;
mod sheets;
mod weights;

pub use approx::{
    build_approximate_solution, build_approximate_solution_with_frame, build_cutoff, solve_inner, ApproxReport,
    CutoffProfile, SUPPORT_TOL,
};
pub use comparison::{metric_comparison, off_diagonal_decay, ErrorNorms, MetricComparison};
pub use experiment::{
    convergence_experiment, family_sweep, identity_reference, CauchyCheck, ConvergenceRecord, ConvergenceReport,
    ExperimentInputs, ExperimentSpec, FamilyReport, Mode, ReportMetadata, CSV_HEADER, NORMS,
};
pub use rates::{rate_fit, rate_fit_clamped, RateFit, TSchedule};
pub use sheets::{sample_field, sheet_diagonal_spread, LoopSpec, SheetSpread};
pub use weights::{weights_from_fn, weights_from_metric, WeightEstimate, WEIGHT_RADII};
