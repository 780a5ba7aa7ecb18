//! Synchronous update engine.
//!
//! Leader `i ∈ L_k`:
//! `x_i(t+1) = α · mean{x_j(t) : j ∈ N_i^{L_k}(t)} + (1 − α) · g_k`
//!
//! Follower `i ∈ F`:
//! `x_i(t+1) = (1 − Σ_k β̃_k) · mean over N_i^F(t) + Σ_k β̃_k · mean over N_i^{L_k}(t)`
//!
//! where `β̃_k = 0` when `N_i^{L_k}(t)` is empty and `β_k` otherwise. The
//! freed weight stays on the follower mean; nothing is renormalized.
//!
//! Every mean is summed in ascending agent id and divided once, then scaled
//! by its weight, so the output is bit-identical at any thread count.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::StopCriterion;
use crate::error::DynamicsError;
use crate::model::{squared_distance, AgentId, GroupId, SystemState};
use crate::neighborhood::{neighbors, AgentNeighbors, NeighborSets};
use crate::scenario::Scenario;
use crate::schedule::BETA_SUM_SLACK;

/// Deliberate corruption of the update rule, used to show that the theorem
/// checks reject broken dynamics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fault {
    /// Adds `fraction · ε` to every coordinate of every neighbor mean.
    MeanShift { fraction: f64 },
}

impl Fault {
    pub const MEAN_SHIFT_DEFAULT: Fault = Fault::MeanShift { fraction: 0.05 };
}

/// A point that carries weight in an agent's update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Agent(AgentId),
    Target(usize),
}

/// The convex-combination weights realized by one agent's update.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentWeights {
    /// Total weight on the own-group mean (`α` or `1 − Σβ̃`).
    pub own_weight: f64,
    pub own_count: usize,
    /// Followers: `(β̃_k, |N_i^{L_k}|)` per leader group.
    pub leader_terms: Vec<(f64, usize)>,
    /// Leaders: `(k, 1 − α)`.
    pub target: Option<(usize, f64)>,
}

impl AgentWeights {
    pub fn total(&self) -> f64 {
        self.own_weight
            + self.leader_terms.iter().map(|(w, _)| w).sum::<f64>()
            + self.target.map_or(0.0, |(_, w)| w)
    }

    /// Per-generator weights: each neighbor gets its term's weight divided by
    /// the term's neighbor count.
    pub fn explicit(&self, nb: &AgentNeighbors) -> Vec<(Generator, f64)> {
        let mut out = Vec::new();
        let per = |w: f64, n: usize| if n == 0 { 0.0 } else { w / n as f64 };
        for &j in &nb.own {
            out.push((Generator::Agent(j), per(self.own_weight, self.own_count)));
        }
        for (k, &(w, n)) in self.leader_terms.iter().enumerate() {
            for &j in &nb.leaders[k] {
                out.push((Generator::Agent(j), per(w, n)));
            }
        }
        if let Some((k, w)) = self.target {
            out.push((Generator::Target(k), w));
        }
        out
    }
}

/// Realized weights of every agent for the step `t → t+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepWeights {
    pub t: u64,
    pub per_agent: Vec<AgentWeights>,
}

fn mean_into(state: &SystemState, ids: &[AgentId], shift: f64, out: &mut [f64]) {
    out.fill(0.0);
    for &j in ids {
        for (o, x) in out.iter_mut().zip(state.opinion(j)) {
            *o += x;
        }
    }
    let n = ids.len() as f64;
    for o in out.iter_mut() {
        *o /= n;
        if shift != 0.0 {
            *o += shift;
        }
    }
}

/// New opinion of leader `i`: `α · mean(N_i) + (1 − α) · g`.
pub fn leader_update(state: &SystemState, neighbors: &[AgentId], alpha: f64, target: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; state.dim()];
    leader_update_into(state, neighbors, alpha, target, 0.0, &mut out);
    out
}

fn leader_update_into(
    state: &SystemState,
    neighbors: &[AgentId],
    alpha: f64,
    target: &[f64],
    shift: f64,
    out: &mut [f64],
) {
    mean_into(state, neighbors, shift, out);
    for (o, g) in out.iter_mut().zip(target) {
        *o = alpha * *o + (1.0 - alpha) * g;
    }
}

/// New opinion of a follower, plus the masked degrees `β̃` it used.
pub fn follower_update(
    state: &SystemState,
    own: &[AgentId],
    leader_sets: &[Vec<AgentId>],
    betas: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut out = vec![0.0; state.dim()];
    let mut masked = Vec::new();
    let mut scratch = vec![0.0; state.dim()];
    follower_update_into(state, own, leader_sets, betas, 0.0, &mut out, &mut masked, &mut scratch);
    (out, masked)
}

#[allow(clippy::too_many_arguments)]
fn follower_update_into(
    state: &SystemState,
    own: &[AgentId],
    leader_sets: &[Vec<AgentId>],
    betas: &[f64],
    shift: f64,
    out: &mut [f64],
    masked: &mut Vec<f64>,
    scratch: &mut [f64],
) -> f64 {
    masked.clear();
    masked.extend(
        betas
            .iter()
            .zip(leader_sets)
            .map(|(&b, set)| if set.is_empty() { 0.0 } else { b }),
    );
    let sum: f64 = masked.iter().sum();
    let own_weight = (1.0 - sum).max(0.0);
    mean_into(state, own, shift, out);
    for o in out.iter_mut() {
        *o *= own_weight;
    }
    for (&b, set) in masked.iter().zip(leader_sets) {
        if b == 0.0 {
            continue;
        }
        mean_into(state, set, shift, scratch);
        for (o, m) in out.iter_mut().zip(scratch.iter()) {
            *o += b * m;
        }
    }
    own_weight
}

fn check_degree(v: f64, t: u64, agent: AgentId, what: &str) -> Result<(), DynamicsError> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(DynamicsError::ScheduleViolation {
            t,
            agent,
            detail: format!("{what} = {v} outside [0, 1]"),
        })
    }
}

/// Cheap per-step record kept even when weights are not retained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepDigest {
    pub t: u64,
    /// Σ over agents of all neighbor-set sizes.
    pub neighbor_entries: usize,
    /// Follower leader-terms masked because the leader set was empty.
    pub masked_terms: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    HorizonReached,
    /// Max displacement stayed within tolerance over the stop window.
    Converged { at: u64 },
    /// State repeated exactly under time-invariant degrees: a fixed point.
    Stagnated { at: u64 },
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::HorizonReached => "horizon_reached",
            StopReason::Converged { .. } => "converged",
            StopReason::Stagnated { .. } => "stagnated",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    scenario: Arc<Scenario>,
    states: Vec<SystemState>,
    weights: Vec<StepWeights>,
    digests: Vec<StepDigest>,
    stop: StopReason,
}

impl Trajectory {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn scenario_arc(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    /// States for `t = 0..=T`.
    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn state(&self, t: usize) -> &SystemState {
        &self.states[t]
    }

    pub fn initial(&self) -> &SystemState {
        &self.states[0]
    }

    pub fn last(&self) -> &SystemState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Number of steps taken, `T`.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Weights per step; empty unless the simulator retained them.
    pub fn weights(&self) -> &[StepWeights] {
        &self.weights
    }

    pub fn digests(&self) -> &[StepDigest] {
        &self.digests
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }
}

/// Largest per-agent Euclidean move between two states.
pub fn max_displacement(a: &SystemState, b: &SystemState) -> f64 {
    a.rows()
        .zip(b.rows())
        .map(|(x, y)| squared_distance(x, y))
        .fold(0.0, f64::max)
        .sqrt()
}

/// Runs the mixed model for one scenario.
#[derive(Clone, Debug)]
pub struct Simulator {
    scenario: Arc<Scenario>,
    fault: Option<Fault>,
    retain_weights: bool,
}

impl Simulator {
    pub fn new(scenario: impl Into<Arc<Scenario>>) -> Self {
        Simulator {
            scenario: scenario.into(),
            fault: None,
            retain_weights: false,
        }
    }

    pub fn with_fault(mut self, fault: Option<Fault>) -> Self {
        self.fault = fault;
        self
    }

    /// Keep every step's [`StepWeights`] in the trajectory.
    pub fn retain_weights(mut self, keep: bool) -> Self {
        self.retain_weights = keep;
        self
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn shift(&self) -> f64 {
        match self.fault {
            Some(Fault::MeanShift { fraction }) => fraction * self.scenario.epsilon(),
            None => 0.0,
        }
    }

    /// One synchronous step from `state` (at time `state.t()`).
    pub fn step(&self, state: &SystemState) -> Result<(SystemState, StepWeights), DynamicsError> {
        let nb = neighbors(state, &self.scenario);
        self.step_with(state, &nb)
    }

    /// One step using precomputed neighbor sets of `state`.
    pub fn step_with(
        &self,
        state: &SystemState,
        nb: &NeighborSets,
    ) -> Result<(SystemState, StepWeights), DynamicsError> {
        let sc = &*self.scenario;
        let t = state.t();
        let d = state.dim();
        let shift = self.shift();
        let mut next = vec![0.0; state.as_flat().len()];
        let per_agent: Vec<Result<AgentWeights, DynamicsError>> = next
            .par_chunks_mut(d)
            .enumerate()
            .map_init(
                || (Vec::new(), Vec::new(), vec![0.0; d]),
                |(betas, masked, scratch), (i, out)| {
                    let sets = nb.agent(i);
                    match sc.partition().group_of(i) {
                        GroupId::Leader(k) => {
                            let alpha = sc.degrees().alpha(i, t).expect("leader has α");
                            check_degree(alpha, t, i, "α")?;
                            leader_update_into(state, &sets.own, alpha, sc.target(k).coords(), shift, out);
                            Ok(AgentWeights {
                                own_weight: alpha,
                                own_count: sets.own.len(),
                                leader_terms: Vec::new(),
                                target: Some((k, 1.0 - alpha)),
                            })
                        }
                        GroupId::Follower => {
                            sc.degrees().betas_into(i, t, betas);
                            for (k, &b) in betas.iter().enumerate() {
                                check_degree(b, t, i, &format!("β^{}", k + 1))?;
                            }
                            let sum: f64 = betas.iter().sum();
                            if sum > 1.0 + BETA_SUM_SLACK {
                                return Err(DynamicsError::ScheduleViolation {
                                    t,
                                    agent: i,
                                    detail: format!("Σβ = {sum} > 1"),
                                });
                            }
                            let own_weight = follower_update_into(
                                state,
                                &sets.own,
                                &sets.leaders,
                                betas,
                                shift,
                                out,
                                masked,
                                scratch,
                            );
                            Ok(AgentWeights {
                                own_weight,
                                own_count: sets.own.len(),
                                leader_terms: masked
                                    .iter()
                                    .zip(&sets.leaders)
                                    .map(|(&b, s)| (b, s.len()))
                                    .collect(),
                                target: None,
                            })
                        }
                    }
                },
            )
            .collect();
        let mut weights = Vec::with_capacity(per_agent.len());
        for w in per_agent {
            weights.push(w?);
        }
        Ok((
            SystemState::from_parts_unchecked(t + 1, d, next),
            StepWeights { t, per_agent: weights },
        ))
    }

    /// Runs with the scenario's horizon and stop criterion.
    pub fn run(&self) -> Result<Trajectory, DynamicsError> {
        let e = self.scenario.engine();
        self.run_with(e.horizon, e.stop)
    }

    pub fn run_with(&self, horizon: u64, stop: Option<StopCriterion>) -> Result<Trajectory, DynamicsError> {
        let sc = &self.scenario;
        let fixed_point_possible = stop.is_none() && sc.degrees().is_time_invariant();
        let mut states = vec![sc.initial_state().clone()];
        let mut weights = Vec::new();
        let mut digests = Vec::new();
        let mut displacements: Vec<f64> = Vec::new();
        let mut reason = StopReason::HorizonReached;
        for _ in 0..horizon {
            let cur = states.last().expect("nonempty");
            let nb = neighbors(cur, sc);
            let (next, w) = self.step_with(cur, &nb)?;
            digests.push(StepDigest {
                t: cur.t(),
                neighbor_entries: nb.total_entries(),
                masked_terms: nb
                    .iter()
                    .map(|a| a.leaders.iter().filter(|s| s.is_empty()).count())
                    .sum(),
            });
            if self.retain_weights {
                weights.push(w);
            }
            let moved = max_displacement(cur, &next);
            let t_next = next.t();
            let repeated = next.as_flat() == cur.as_flat();
            states.push(next);
            displacements.push(moved);
            if let Some(StopCriterion { tol, window }) = stop {
                if displacements.len() >= window && displacements[displacements.len() - window..].iter().all(|&m| m <= tol) {
                    reason = StopReason::Converged { at: t_next };
                    break;
                }
            } else if fixed_point_possible && repeated {
                reason = StopReason::Stagnated { at: t_next };
                break;
            }
        }
        Ok(Trajectory {
            scenario: Arc::clone(&self.scenario),
            states,
            weights,
            digests,
            stop: reason,
        })
    }
}

/// One synchronous step of `scenario` from `state`.
pub fn step(state: &SystemState, scenario: &Scenario) -> Result<(SystemState, StepWeights), DynamicsError> {
    Simulator::new(scenario.clone()).step(state)
}

/// Runs `scenario` for at most `horizon` steps.
pub fn run(scenario: &Scenario, horizon: u64, stop: Option<StopCriterion>) -> Result<Trajectory, DynamicsError> {
    Simulator::new(scenario.clone()).run_with(horizon, stop)
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}
