//! ε-neighbor sets, split by group.
//!
//! A follower sees followers and every leader group; a leader sees only its
//! own group. Two implementations produce identical sets: an O(N²) pairwise
//! scan and a uniform grid with cell side ε. Both use the same predicate,
//! `squared_distance(x_i, x_j) <= ε²`, so agreement is exact.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{squared_distance, AgentId, GroupId, SystemState};
use crate::scenario::Scenario;

/// Below this population the grid's setup cost outweighs the pairwise scan.
const AUTO_GRID_MIN_AGENTS: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborStrategy {
    Naive,
    Grid,
    #[default]
    Auto,
}

/// Neighbors of one agent, ascending ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentNeighbors {
    /// `N_i^F` for a follower, `N_i^{L_k}` for a leader in `L_k`.
    pub own: Vec<AgentId>,
    /// Followers only: `N_i^{L_k}` for every `k`. Empty for leaders.
    pub leaders: Vec<Vec<AgentId>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSets {
    per_agent: Vec<AgentNeighbors>,
}

impl NeighborSets {
    pub fn agent(&self, i: AgentId) -> &AgentNeighbors {
        &self.per_agent[i]
    }

    pub fn own(&self, i: AgentId) -> &[AgentId] {
        &self.per_agent[i].own
    }

    /// `N_i^{L_k}` as seen by follower `i`.
    pub fn leader_group(&self, i: AgentId, k: usize) -> &[AgentId] {
        &self.per_agent[i].leaders[k]
    }

    pub fn len(&self) -> usize {
        self.per_agent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_agent.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AgentNeighbors> {
        self.per_agent.iter()
    }

    /// Total number of (agent, neighbor) entries across all sets.
    pub fn total_entries(&self) -> usize {
        self.per_agent
            .iter()
            .map(|a| a.own.len() + a.leaders.iter().map(Vec::len).sum::<usize>())
            .sum()
    }
}

/// How `neighbors_grid` produced its answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchPath {
    /// Grid scan; `candidates` counts the (i, j) pairs whose distance was tested.
    Grid { candidates: u64 },
    /// Dimension above the cap; the pairwise scan was used instead.
    FallbackToNaive,
}

#[derive(Clone, Debug)]
pub struct GridSearch {
    pub sets: NeighborSets,
    pub path: SearchPath,
}

/// Exact pairwise neighbor sets.
pub fn neighbors_naive(state: &SystemState, scenario: &Scenario) -> NeighborSets {
    let eps2 = scenario.epsilon() * scenario.epsilon();
    let partition = scenario.partition();
    let m = partition.leader_groups();
    let within = |i: AgentId, ids: &[AgentId]| -> Vec<AgentId> {
        let xi = state.opinion(i);
        ids.iter()
            .copied()
            .filter(|&j| squared_distance(xi, state.opinion(j)) <= eps2)
            .collect()
    };
    let per_agent = (0..state.len())
        .into_par_iter()
        .map(|i| match partition.group_of(i) {
            GroupId::Leader(k) => AgentNeighbors {
                own: within(i, partition.leaders(k)),
                leaders: Vec::new(),
            },
            GroupId::Follower => AgentNeighbors {
                own: within(i, partition.followers()),
                leaders: (0..m).map(|k| within(i, partition.leaders(k))).collect(),
            },
        })
        .collect();
    NeighborSets { per_agent }
}

/// Grid-accelerated neighbor sets, set-equal to [`neighbors_naive`]. Falls
/// back to the pairwise scan when `d` exceeds the scenario's `grid_dim_cap`.
pub fn neighbors_grid(state: &SystemState, scenario: &Scenario) -> GridSearch {
    if state.dim() > scenario.engine().grid_dim_cap {
        return GridSearch {
            sets: neighbors_naive(state, scenario),
            path: SearchPath::FallbackToNaive,
        };
    }
    let eps = scenario.epsilon();
    let eps2 = eps * eps;
    let partition = scenario.partition();
    let m = partition.leader_groups();
    let grid = GridIndex::build(state, eps);

    let results: Vec<(AgentNeighbors, u64)> = (0..state.len())
        .into_par_iter()
        .map(|i| {
            let xi = state.opinion(i);
            let mine = partition.group_of(i);
            let mut out = AgentNeighbors {
                own: Vec::new(),
                leaders: match mine {
                    GroupId::Follower => vec![Vec::new(); m],
                    GroupId::Leader(_) => Vec::new(),
                },
            };
            let mut tested = 0u64;
            grid.for_each_candidate(xi, eps, |j| {
                let theirs = partition.group_of(j);
                let slot = match (mine, theirs) {
                    (GroupId::Follower, GroupId::Follower) => &mut out.own,
                    (GroupId::Follower, GroupId::Leader(k)) => &mut out.leaders[k],
                    (GroupId::Leader(a), GroupId::Leader(b)) if a == b => &mut out.own,
                    _ => return,
                };
                tested += 1;
                if squared_distance(xi, state.opinion(j)) <= eps2 {
                    slot.push(j);
                }
            });
            out.own.sort_unstable();
            for l in &mut out.leaders {
                l.sort_unstable();
            }
            (out, tested)
        })
        .collect();

    let candidates = results.iter().map(|(_, c)| c).sum();
    GridSearch {
        sets: NeighborSets {
            per_agent: results.into_iter().map(|(a, _)| a).collect(),
        },
        path: SearchPath::Grid { candidates },
    }
}

/// Neighbor sets using the scenario's configured strategy.
pub fn neighbors(state: &SystemState, scenario: &Scenario) -> NeighborSets {
    match scenario.engine().neighbor_strategy {
        NeighborStrategy::Naive => neighbors_naive(state, scenario),
        NeighborStrategy::Grid => neighbors_grid(state, scenario).sets,
        NeighborStrategy::Auto => {
            if state.len() >= AUTO_GRID_MIN_AGENTS && state.dim() <= scenario.engine().grid_dim_cap {
                neighbors_grid(state, scenario).sets
            } else {
                neighbors_naive(state, scenario)
            }
        }
    }
}

/// Uniform grid over opinions. Agent `i` lives in cell `floor(x_i / side)`
/// (left-closed cells); member lists are in ascending id order.
#[derive(Clone, Debug)]
pub struct GridIndex {
    side: f64,
    dim: usize,
    cells: HashMap<Vec<i64>, Vec<AgentId>>,
}

impl GridIndex {
    pub fn build(state: &SystemState, side: f64) -> Self {
        let dim = state.dim();
        let mut cells: HashMap<Vec<i64>, Vec<AgentId>> = HashMap::new();
        let mut key = Vec::with_capacity(dim);
        for (i, x) in state.rows().enumerate() {
            cell_key(x, side, &mut key);
            match cells.get_mut(key.as_slice()) {
                Some(members) => members.push(i),
                None => {
                    cells.insert(key.clone(), vec![i]);
                }
            }
        }
        GridIndex { side, dim, cells }
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        let mut key = Vec::with_capacity(self.dim);
        cell_key(x, self.side, &mut key);
        key
    }

    pub fn members(&self, key: &[i64]) -> &[AgentId] {
        self.cells.get(key).map_or(&[], Vec::as_slice)
    }

    /// Calls `f` for every agent in the cells that can hold a point within
    /// `radius` of `x`. With `radius == side` this is the 3^d Moore block;
    /// the bounds are widened by a few ulps so rounding in `x / side` never
    /// drops a true neighbor, which occasionally adds one more layer.
    pub fn for_each_candidate(&self, x: &[f64], radius: f64, mut f: impl FnMut(AgentId)) {
        let mut lo = Vec::with_capacity(self.dim);
        let mut hi = Vec::with_capacity(self.dim);
        for &c in x {
            let margin = 8.0 * f64::EPSILON * (c.abs() + radius);
            lo.push(((c - radius - margin) / self.side).floor() as i64);
            hi.push(((c + radius + margin) / self.side).floor() as i64);
        }
        let mut key = lo.clone();
        loop {
            if let Some(members) = self.cells.get(key.as_slice()) {
                members.iter().copied().for_each(&mut f);
            }
            // odometer over the key box
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    return;
                }
                if key[axis] < hi[axis] {
                    key[axis] += 1;
                    break;
                }
                key[axis] = lo[axis];
                axis += 1;
            }
        }
    }
}

fn cell_key(x: &[f64], side: f64, key: &mut Vec<i64>) {
    key.clear();
    key.extend(x.iter().map(|c| (c / side).floor() as i64));
}
