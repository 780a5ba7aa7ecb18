//! Time-varying mixing degrees.
//!
//! A leader `i ∈ L_k` has one scalar degree `α_i(t)`, the weight kept on the
//! mean of its own-group neighbors (`1 − α` goes to the target). A follower has
//! one degree `β_i^k(t)` per leader group, the weight moved onto the mean of its
//! neighbors in that group. Every schedule is a pure function of `(agent, t)`.

use std::fmt;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::model::{AgentId, GroupId, Partition};

/// Slack allowed on `Σ_k β_i^k ≤ 1` for decimal inputs such as `0.1 + 0.2 + 0.7`.
pub const BETA_SUM_SLACK: f64 = 1e-12;

type DegreeFn = dyn Fn(AgentId, u64) -> f64 + Send + Sync;

/// User-supplied degree function. Cannot be range-checked ahead of time, so
/// the engine checks every value it returns.
#[derive(Clone)]
pub struct CustomSchedule(Arc<DegreeFn>);

impl CustomSchedule {
    pub fn new(f: impl Fn(AgentId, u64) -> f64 + Send + Sync + 'static) -> Self {
        CustomSchedule(Arc::new(f))
    }
}

impl fmt::Debug for CustomSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomSchedule(..)")
    }
}

impl PartialEq for CustomSchedule {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// One scalar degree as a function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum ScalarSchedule {
    Constant {
        value: f64,
    },
    /// `values[t]`, holding the last entry for `t >= values.len()`.
    Table {
        values: Vec<f64>,
    },
    /// `initial · ratio^t`, clamped to `[0, 1]`.
    GeometricDecay {
        initial: f64,
        ratio: f64,
    },
    /// Uniform draws in `[low, high]`, keyed by `(seed, agent, component, t)`.
    SeededRandom {
        seed: u64,
        low: f64,
        high: f64,
    },
    #[serde(skip)]
    Custom(CustomSchedule),
}

impl ScalarSchedule {
    pub fn constant(value: f64) -> Self {
        ScalarSchedule::Constant { value }
    }

    pub fn table(values: Vec<f64>) -> Self {
        ScalarSchedule::Table { values }
    }

    pub fn geometric_decay(initial: f64, ratio: f64) -> Self {
        ScalarSchedule::GeometricDecay { initial, ratio }
    }

    pub fn seeded_random(seed: u64, low: f64, high: f64) -> Self {
        ScalarSchedule::SeededRandom { seed, low, high }
    }

    pub fn custom(f: impl Fn(AgentId, u64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarSchedule::Custom(CustomSchedule::new(f))
    }

    /// Degree at time `t`. `component` separates the random streams of one
    /// follower's per-group degrees.
    pub fn value(&self, agent: AgentId, component: usize, t: u64) -> f64 {
        match self {
            ScalarSchedule::Constant { value } => *value,
            ScalarSchedule::Table { values } => {
                let idx = usize::try_from(t).unwrap_or(usize::MAX).min(values.len() - 1);
                values[idx]
            }
            ScalarSchedule::GeometricDecay { initial, ratio } => {
                let exp = i32::try_from(t).unwrap_or(i32::MAX);
                (initial * ratio.powi(exp)).clamp(0.0, 1.0)
            }
            ScalarSchedule::SeededRandom { seed, low, high } => {
                low + (high - low) * unit_draw(*seed, agent, component, t)
            }
            ScalarSchedule::Custom(f) => (f.0)(agent, t),
        }
    }

    /// Least upper bound over all `t`, or `None` when it cannot be known.
    pub fn sup(&self) -> Option<f64> {
        match self {
            ScalarSchedule::Constant { value } => Some(*value),
            ScalarSchedule::Table { values } => values.iter().copied().reduce(f64::max),
            ScalarSchedule::GeometricDecay { initial, ratio } => {
                if *ratio <= 1.0 || *initial <= 0.0 {
                    Some(initial.clamp(0.0, 1.0))
                } else {
                    Some(1.0)
                }
            }
            ScalarSchedule::SeededRandom { high, .. } => Some(*high),
            ScalarSchedule::Custom(_) => None,
        }
    }

    /// True when the value never changes with `t`.
    pub fn is_time_invariant(&self) -> bool {
        match self {
            ScalarSchedule::Constant { .. } => true,
            ScalarSchedule::Table { values } => values.len() == 1,
            ScalarSchedule::GeometricDecay { initial, ratio } => *initial == 0.0 || *ratio == 1.0,
            ScalarSchedule::SeededRandom { low, high, .. } => low == high,
            ScalarSchedule::Custom(_) => false,
        }
    }

    pub fn validate(&self, what: &str) -> Result<(), ScenarioError> {
        let in_unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        let bad = |detail: String| Err(ScenarioError::DegreeOutOfRange(format!("{what}: {detail}")));
        match self {
            ScalarSchedule::Constant { value } if !in_unit(*value) => bad(format!("constant {value}")),
            ScalarSchedule::Table { values } if values.is_empty() => {
                Err(ScenarioError::InvalidSchedule(format!("{what}: empty table")))
            }
            ScalarSchedule::Table { values } => match values.iter().find(|v| !in_unit(**v)) {
                Some(v) => bad(format!("table entry {v}")),
                None => Ok(()),
            },
            ScalarSchedule::GeometricDecay { initial, ratio }
                if !initial.is_finite() || !ratio.is_finite() || *initial < 0.0 || *ratio < 0.0 =>
            {
                bad(format!("geometric decay initial {initial}, ratio {ratio}"))
            }
            ScalarSchedule::SeededRandom { low, high, .. }
                if !in_unit(*low) || !in_unit(*high) || low > high =>
            {
                bad(format!("random interval [{low}, {high}]"))
            }
            _ => Ok(()),
        }
    }
}

fn unit_draw(seed: u64, agent: AgentId, component: usize, t: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((agent as u64) << 16) | (component as u64 & 0xffff));
    rng.set_word_pos(u128::from(t) * 2);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Degree schedules of one agent.
#[derive(Clone, Debug, PartialEq)]
pub enum AgentDegrees {
    Leader(ScalarSchedule),
    /// One schedule per leader group, in group order.
    Follower(Vec<ScalarSchedule>),
}

/// Per-agent degree schedules for the whole population.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSchedule {
    per_agent: Vec<AgentDegrees>,
}

impl DegreeSchedule {
    /// Default degrees: `α = 1` for leaders and `β = 0` for followers, which
    /// reduces every group to plain bounded-confidence averaging.
    pub fn neutral(partition: &Partition) -> Self {
        let m = partition.leader_groups();
        let per_agent = partition
            .assignment()
            .iter()
            .map(|g| match g {
                GroupId::Leader(_) => AgentDegrees::Leader(ScalarSchedule::constant(1.0)),
                GroupId::Follower => AgentDegrees::Follower(vec![ScalarSchedule::constant(0.0); m]),
            })
            .collect();
        DegreeSchedule { per_agent }
    }

    pub(crate) fn from_agents(per_agent: Vec<AgentDegrees>) -> Self {
        DegreeSchedule { per_agent }
    }

    pub fn set_alpha(&mut self, agent: AgentId, schedule: ScalarSchedule) -> Result<(), ScenarioError> {
        match self.per_agent.get_mut(agent) {
            Some(AgentDegrees::Leader(s)) => {
                *s = schedule;
                Ok(())
            }
            _ => Err(ScenarioError::InvalidSchedule(format!(
                "agent {agent} is not a leader; α applies to leaders only"
            ))),
        }
    }

    pub fn set_beta(
        &mut self,
        agent: AgentId,
        group: usize,
        schedule: ScalarSchedule,
    ) -> Result<(), ScenarioError> {
        match self.per_agent.get_mut(agent) {
            Some(AgentDegrees::Follower(v)) if group < v.len() => {
                v[group] = schedule;
                Ok(())
            }
            Some(AgentDegrees::Follower(_)) => Err(ScenarioError::UnknownGroup(format!("L{}", group + 1))),
            _ => Err(ScenarioError::InvalidSchedule(format!(
                "agent {agent} is not a follower; β applies to followers only"
            ))),
        }
    }

    pub fn agent(&self, agent: AgentId) -> &AgentDegrees {
        &self.per_agent[agent]
    }

    /// `α_i(t)` for a leader; `None` for followers.
    pub fn alpha(&self, agent: AgentId, t: u64) -> Option<f64> {
        match &self.per_agent[agent] {
            AgentDegrees::Leader(s) => Some(s.value(agent, 0, t)),
            AgentDegrees::Follower(_) => None,
        }
    }

    /// Writes `β_i^k(t)` for every `k` into `out`; returns false for leaders.
    pub fn betas_into(&self, agent: AgentId, t: u64, out: &mut Vec<f64>) -> bool {
        out.clear();
        match &self.per_agent[agent] {
            AgentDegrees::Follower(v) => {
                out.extend(v.iter().enumerate().map(|(k, s)| s.value(agent, k, t)));
                true
            }
            AgentDegrees::Leader(_) => false,
        }
    }

    pub fn betas(&self, agent: AgentId, t: u64) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        self.betas_into(agent, t, &mut out).then_some(out)
    }

    pub fn is_time_invariant(&self) -> bool {
        self.per_agent.iter().all(|a| match a {
            AgentDegrees::Leader(s) => s.is_time_invariant(),
            AgentDegrees::Follower(v) => v.iter().all(ScalarSchedule::is_time_invariant),
        })
    }

    /// Checks every range invariant that can be decided statically. A
    /// follower is rejected when the sum of its per-group suprema exceeds 1.
    pub fn validate(&self) -> Vec<ScenarioError> {
        let mut errors = Vec::new();
        for (i, a) in self.per_agent.iter().enumerate() {
            match a {
                AgentDegrees::Leader(s) => {
                    if let Err(e) = s.validate(&format!("α of agent {i}")) {
                        errors.push(e);
                    }
                }
                AgentDegrees::Follower(v) => {
                    let mut ok = true;
                    for (k, s) in v.iter().enumerate() {
                        if let Err(e) = s.validate(&format!("β^{} of agent {i}", k + 1)) {
                            errors.push(e);
                            ok = false;
                        }
                    }
                    if ok {
                        let sum: Option<f64> = v.iter().map(ScalarSchedule::sup).sum();
                        if let Some(sum) = sum {
                            if sum > 1.0 + BETA_SUM_SLACK {
                                errors.push(ScenarioError::BetaSumExceedsOne { agent: i, sum });
                            }
                        }
                    }
                }
            }
        }
        errors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_holds_final_value() {
        let s = ScalarSchedule::table(vec![0.1, 0.2, 0.3]);
        assert_eq!(s.value(0, 0, 0), 0.1);
        assert_eq!(s.value(0, 0, 2), 0.3);
        assert_eq!(s.value(0, 0, 1_000_000), 0.3);
    }

    #[test]
    fn geometric_decay_is_clamped() {
        let s = ScalarSchedule::geometric_decay(1.0, 0.5);
        assert_eq!(s.value(0, 0, 0), 1.0);
        assert_eq!(s.value(0, 0, 3), 0.125);
        let grow = ScalarSchedule::geometric_decay(0.5, 2.0);
        assert_eq!(grow.value(0, 0, 5), 1.0);
        assert_eq!(grow.sup(), Some(1.0));
    }

    #[test]
    fn seeded_random_is_pure_and_in_range() {
        let s = ScalarSchedule::seeded_random(42, 0.2, 0.7);
        for agent in 0..20 {
            for t in 0..50 {
                let v = s.value(agent, 1, t);
                assert!((0.2..=0.7).contains(&v));
                assert_eq!(v, s.value(agent, 1, t));
            }
        }
        assert_ne!(s.value(0, 0, 0), s.value(0, 1, 0));
        assert_ne!(s.value(0, 0, 0), s.value(1, 0, 0));
        assert_ne!(s.value(0, 0, 0), s.value(0, 0, 1));
    }

    #[test]
    fn range_validation() {
        assert!(ScalarSchedule::constant(1.2).validate("x").is_err());
        assert!(ScalarSchedule::constant(-0.1).validate("x").is_err());
        assert!(ScalarSchedule::constant(f64::NAN).validate("x").is_err());
        assert!(ScalarSchedule::table(vec![]).validate("x").is_err());
        assert!(ScalarSchedule::table(vec![0.5, 1.5]).validate("x").is_err());
        assert!(ScalarSchedule::seeded_random(1, 0.6, 0.4).validate("x").is_err());
        assert!(ScalarSchedule::geometric_decay(-1.0, 0.5).validate("x").is_err());
        assert!(ScalarSchedule::geometric_decay(0.5, 0.5).validate("x").is_ok());
    }

    #[test]
    fn beta_sum_rejected() {
        let p = Partition::new(vec![GroupId::Follower, GroupId::Leader(0), GroupId::Leader(1)], 2).unwrap();
        let mut d = DegreeSchedule::neutral(&p);
        d.set_beta(0, 0, ScalarSchedule::constant(0.6)).unwrap();
        d.set_beta(0, 1, ScalarSchedule::constant(0.6)).unwrap();
        let errs = d.validate();
        assert!(matches!(errs[..], [ScenarioError::BetaSumExceedsOne { agent: 0, .. }]));
    }

    #[test]
    fn decimal_sum_to_one_accepted() {
        let p = Partition::new(
            vec![GroupId::Follower, GroupId::Leader(0), GroupId::Leader(1), GroupId::Leader(2)],
            3,
        )
        .unwrap();
        let mut d = DegreeSchedule::neutral(&p);
        for (k, v) in [0.1, 0.2, 0.7].into_iter().enumerate() {
            d.set_beta(0, k, ScalarSchedule::constant(v)).unwrap();
        }
        assert!(d.validate().is_empty());
    }

    #[test]
    fn wrong_role_rejected() {
        let p = Partition::new(vec![GroupId::Follower, GroupId::Leader(0)], 1).unwrap();
        let mut d = DegreeSchedule::neutral(&p);
        assert!(d.set_alpha(0, ScalarSchedule::constant(0.5)).is_err());
        assert!(d.set_beta(1, 0, ScalarSchedule::constant(0.5)).is_err());
        assert!(d.set_beta(0, 3, ScalarSchedule::constant(0.5)).is_err());
    }

    #[test]
    fn serde_shape() {
        let s = ScalarSchedule::geometric_decay(1.0, 0.5);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"geometric_decay","parameters":{"initial":1.0,"ratio":0.5}}"#);
        let back: ScalarSchedule = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::to_string(&ScalarSchedule::custom(|_, _| 0.5)).is_err());
    }
}
