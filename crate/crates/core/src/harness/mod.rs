//! Monte Carlo experiments for the random-operator tail bounds and for
//! convergence in the r-th mean.

pub mod convergence;
pub mod stats;
pub mod tailbound;

pub use convergence::{convergence_in_mean_check, ConvergenceExperiment, ConvergenceReport, ConvergenceRow};
pub use stats::{estimate_expectation, ks_pvalue, ks_statistic, mean_stderr, pairwise_sum, Estimate};
pub use tailbound::{
    divided_difference_norm, run_tail_bound, run_tail_bound_with_workers, ExperimentIntegrand, FixedKappaReport,
    NamedEstimate, ReportMetadata, TailBoundExperiment, TailBoundReport, TailRow, TheoremId,
};
