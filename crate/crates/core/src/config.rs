//! The JSON scenario document.
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "epsilon": 1.0,
//!   "groups": [
//!     {"name": "F",  "kind": "follower", "members": 1},
//!     {"name": "L1", "kind": "leader", "target": [0.0], "members": 1}
//!   ],
//!   "initial_opinions": {"explicit": [[0.3], [0.1]]},
//!   "schedules": [
//!     {"group": "L1", "kind": "constant", "parameters": {"value": 0.5}},
//!     {"group": "F", "leader_group": "L1", "kind": "constant", "parameters": {"value": 0.5}}
//!   ],
//!   "engine": {"neighbor_strategy": "auto", "horizon": 200, "stop": {"tol": 1e-12, "window": 1}}
//! }
//! ```
//!
//! `members` is either a count (ids handed out in declaration order from the
//! lowest unclaimed id) or an explicit id list. Schedule rules apply in order,
//! so a later `agent` rule overrides an earlier `group` rule.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::neighborhood::NeighborStrategy;
use crate::schedule::ScalarSchedule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dimension: usize,
    pub epsilon: f64,
    pub groups: Vec<GroupConfig>,
    pub initial_opinions: InitialOpinions,
    #[serde(default)]
    pub schedules: Vec<ScheduleRule>,
    #[serde(default)]
    pub engine: EngineOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Follower,
    Leader,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub kind: GroupKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    pub members: Members,
    /// Follower groups only: the leader group whose subsystem these
    /// followers belong to, for independent-subsystem analysis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attach: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Members {
    Count(usize),
    Ids(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialOpinions {
    Explicit(Vec<Vec<f64>>),
    Random(RandomInit),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInit {
    pub distribution: Distribution,
    pub low: Bound,
    pub high: Bound,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    UniformBox,
}

/// A box corner: one value for every coordinate, or one per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Scalar(f64),
    PerCoordinate(Vec<f64>),
}

impl Bound {
    pub fn coord(&self, c: usize) -> Option<f64> {
        match self {
            Bound::Scalar(v) => Some(*v),
            Bound::PerCoordinate(v) => v.get(c).copied(),
        }
    }
}

/// Assigns a schedule to every agent of a group, or to one agent.
/// `leader_group` selects which `β^k` a follower rule sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader_group: Option<String>,
    #[serde(flatten)]
    pub schedule: ScalarSchedule,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopCriterion {
    /// Max per-agent displacement allowed over the trailing window.
    pub tol: f64,
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineOptions {
    pub neighbor_strategy: NeighborStrategy,
    pub horizon: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopCriterion>,
    pub record_every: u64,
    pub grid_dim_cap: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            neighbor_strategy: NeighborStrategy::Auto,
            horizon: 1000,
            stop: None,
            record_every: 1,
            grid_dim_cap: 6,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"{
        "dimension": 1,
        "epsilon": 1.0,
        "groups": [
            {"name": "F", "kind": "follower", "members": 1},
            {"name": "L1", "kind": "leader", "target": [0.0], "members": [1]}
        ],
        "initial_opinions": {"explicit": [[0.3], [0.1]]},
        "schedules": [
            {"group": "L1", "kind": "constant", "parameters": {"value": 0.5}},
            {"group": "F", "leader_group": "L1", "kind": "table", "parameters": {"values": [0.5, 0.25]}}
        ],
        "engine": {"neighbor_strategy": "grid", "horizon": 60}
    }"#;

    #[test]
    fn parses_document() {
        let c = ScenarioConfig::from_json(DEMO).unwrap();
        assert_eq!(c.groups.len(), 2);
        assert_eq!(c.groups[1].members, Members::Ids(vec![1]));
        assert_eq!(c.engine.neighbor_strategy, NeighborStrategy::Grid);
        assert_eq!(c.engine.record_every, 1);
        assert_eq!(c.schedules[1].leader_group.as_deref(), Some("L1"));
        assert_eq!(c.schedules[1].schedule, ScalarSchedule::table(vec![0.5, 0.25]));
    }

    #[test]
    fn random_initial_block() {
        let c: InitialOpinions = serde_json::from_str(
            r#"{"random": {"distribution": "uniform_box", "low": 0.0, "high": [1.0, 2.0], "seed": 9}}"#,
        )
        .unwrap();
        let InitialOpinions::Random(r) = c else { panic!() };
        assert_eq!(r.high.coord(1), Some(2.0));
        assert_eq!(r.low.coord(5), Some(0.0));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = DEMO.replace("\"epsilon\"", "\"epsilonn\"");
        assert!(ScenarioConfig::from_json(&bad).is_err());
    }
}
