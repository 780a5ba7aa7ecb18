//! Metrics and runtime verification of the model's convergence results.
//!
//! Every check re-derives distances and neighbor relations from the raw
//! states in the trajectory and reads degrees straight from the scenario's
//! schedules; nothing is taken from the engine's own bookkeeping.

mod checks;
mod convergence;
mod metrics;
mod report;

pub use checks::{
    check_ball_invariance, check_corollary_mixture, check_corollary_subsystems, check_lemma_contraction,
    check_lemma_contraction_trajectory, check_theorem_consensus, check_theorem_target,
    check_theorem_target_agent, check_theorem_target_subsequence, CheckOptions,
};
pub use convergence::{detect_convergence, ConvergenceReport};
pub use metrics::{
    degree_extremes, max_target_distance, measured_gamma, metrics_row, metrics_table, reference_point,
    DegreeExtremes, MetricsRow,
};
pub use report::{CheckError, CheckParameters, CheckRecord, TheoremReport};

/// Euclidean distance recomputed locally, independent of the engine's
/// neighbor predicate.
pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
