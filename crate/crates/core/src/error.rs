use std::fmt;

use thiserror::Error;

use crate::model::AgentId;

/// A single scenario validation failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("epsilon must be positive and finite, got {0}")]
    EpsilonNonpositive(f64),
    #[error("partition incomplete: {0}")]
    PartitionIncomplete(String),
    #[error("degree out of range [0, 1]: {0}")]
    DegreeOutOfRange(String),
    #[error("follower degrees for agent {agent} can sum to {sum} > 1")]
    BetaSumExceedsOne { agent: AgentId, sum: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("unknown group '{0}'")]
    UnknownGroup(String),
    #[error("invalid group declaration: {0}")]
    InvalidGroup(String),
    #[error("invalid schedule rule: {0}")]
    InvalidSchedule(String),
    #[error("invalid engine options: {0}")]
    InvalidEngine(String),
}

/// Every validation failure found in one raw config.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationErrors(pub Vec<ScenarioError>);

impl ValidationErrors {
    pub fn errors(&self) -> &[ScenarioError] {
        &self.0
    }

    pub fn contains(&self, pred: impl Fn(&ScenarioError) -> bool) -> bool {
        self.0.iter().any(pred)
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation error(s)", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl From<ScenarioError> for ValidationErrors {
    fn from(e: ScenarioError) -> Self {
        ValidationErrors(vec![e])
    }
}

/// Runtime failure of the step engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("schedule violation at t={t} for agent {agent}: {detail}")]
    ScheduleViolation {
        t: u64,
        agent: AgentId,
        detail: String,
    },
}
