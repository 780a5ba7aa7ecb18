use rayon::prelude::*;

use crate::analysis::euclid;
use crate::dynamics::Trajectory;
use crate::model::SystemState;
use crate::scenario::Scenario;

/// Per-step summary quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub t: u64,
    /// `C_t^k = max_{i ∈ L_k} ‖x_i(t) − g_k‖` per leader group.
    pub leader_max_distance: Vec<f64>,
    /// `A_t = max_{i ∈ F} ‖x_i(t) − ref‖`; `None` without followers.
    pub follower_max_distance: Option<f64>,
    /// `max_{i,j} ‖x_i(t) − x_j(t)‖`.
    pub diameter: f64,
    /// Scheduled degrees at `t` (unmasked).
    pub degrees: DegreeExtremes,
}

/// Extremes of the scheduled (unmasked) degrees at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeExtremes {
    /// `max_{i ∈ L_k} α_i(t)` per group.
    pub max_alpha: Vec<f64>,
    /// `max_{i ∈ F} (1 − Σ_k β_i^k(t))`; `None` without followers.
    pub max_one_minus_beta_sum: Option<f64>,
}

impl DegreeExtremes {
    /// `max(max_F (1 − Σβ), max_k max_{L_k} α)`.
    pub fn combined(&self) -> f64 {
        self.max_alpha
            .iter()
            .copied()
            .chain(self.max_one_minus_beta_sum)
            .fold(0.0, f64::max)
    }
}

pub fn max_target_distance(state: &SystemState, scenario: &Scenario, k: usize) -> f64 {
    let g = scenario.target(k).coords();
    scenario
        .partition()
        .leaders(k)
        .iter()
        .map(|&i| euclid(state.opinion(i), g))
        .fold(0.0, f64::max)
}

pub fn degree_extremes(scenario: &Scenario, t: u64) -> DegreeExtremes {
    let p = scenario.partition();
    let d = scenario.degrees();
    let max_alpha = (0..p.leader_groups())
        .map(|k| {
            p.leaders(k)
                .iter()
                .map(|&i| d.alpha(i, t).expect("leader"))
                .fold(0.0, f64::max)
        })
        .collect();
    let mut buf = Vec::new();
    let max_one_minus_beta_sum = p
        .followers()
        .iter()
        .map(|&i| {
            d.betas_into(i, t, &mut buf);
            1.0 - buf.iter().sum::<f64>()
        })
        .reduce(f64::max);
    DegreeExtremes {
        max_alpha,
        max_one_minus_beta_sum,
    }
}

/// `sup_{from ≤ s < to} DegreeExtremes::combined`, or the value at `from`
/// when the range is empty.
pub fn measured_gamma(scenario: &Scenario, from: u64, to: u64) -> f64 {
    (from..to.max(from + 1))
        .map(|s| degree_extremes(scenario, s).combined())
        .fold(0.0, f64::max)
}

/// Reference point for `A_t`: the first target, or the initial opinion
/// centroid when there are no leader groups.
pub fn reference_point(scenario: &Scenario) -> Vec<f64> {
    if scenario.num_leader_groups() > 0 {
        return scenario.target(0).coords().to_vec();
    }
    let s = scenario.initial_state();
    let mut c = vec![0.0; s.dim()];
    for row in s.rows() {
        for (a, x) in c.iter_mut().zip(row) {
            *a += x;
        }
    }
    c.iter_mut().for_each(|a| *a /= s.len() as f64);
    c
}

fn diameter(state: &SystemState) -> f64 {
    (0..state.len())
        .into_par_iter()
        .map(|i| {
            let xi = state.opinion(i);
            (i + 1..state.len())
                .map(|j| euclid(xi, state.opinion(j)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

pub fn metrics_row(state: &SystemState, scenario: &Scenario, reference: &[f64]) -> MetricsRow {
    let p = scenario.partition();
    MetricsRow {
        t: state.t(),
        leader_max_distance: (0..p.leader_groups())
            .map(|k| max_target_distance(state, scenario, k))
            .collect(),
        follower_max_distance: p
            .followers()
            .iter()
            .map(|&i| euclid(state.opinion(i), reference))
            .reduce(f64::max),
        diameter: diameter(state),
        degrees: degree_extremes(scenario, state.t()),
    }
}

pub fn metrics_table(trajectory: &Trajectory) -> Vec<MetricsRow> {
    let sc = trajectory.scenario();
    let reference = reference_point(sc);
    trajectory
        .states()
        .iter()
        .map(|s| metrics_row(s, sc, &reference))
        .collect()
}
