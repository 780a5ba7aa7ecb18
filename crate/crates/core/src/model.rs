//! Core domain types: opinions, group tags, the agent partition and system state.

use std::fmt;

use crate::error::ScenarioError;

/// Global agent index, `0..N`.
pub type AgentId = usize;

/// A point in `R^d`. Every coordinate is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct OpinionVec(Vec<f64>);

impl OpinionVec {
    pub fn new(coords: Vec<f64>) -> Result<Self, ScenarioError> {
        if coords.is_empty() {
            return Err(ScenarioError::ZeroDimension);
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(ScenarioError::NonFinite(format!("opinion coordinate {bad}")));
        }
        Ok(OpinionVec(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for OpinionVec {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Squared Euclidean distance, summed in ascending coordinate order.
///
/// This is the single neighbor predicate used everywhere: `j` is an
/// ε-neighbor of `i` iff `squared_distance(x_i, x_j) <= ε²`. The expression
/// is exactly symmetric in its arguments.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc
}

/// Euclidean distance between two opinions of equal dimension.
pub fn distance(a: &OpinionVec, b: &OpinionVec) -> Result<f64, ScenarioError> {
    if a.dim() != b.dim() {
        return Err(ScenarioError::DimensionMismatch {
            what: "distance operands".into(),
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(squared_distance(a.coords(), b.coords()).sqrt())
}

/// Which group an agent belongs to. Leader groups are indexed `0..m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupId {
    Follower,
    Leader(usize),
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Follower => write!(f, "F"),
            GroupId::Leader(k) => write!(f, "L{}", k + 1),
        }
    }
}

/// Total assignment of agents to the follower group and `m` leader groups.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    assignment: Vec<GroupId>,
    followers: Vec<AgentId>,
    leaders: Vec<Vec<AgentId>>,
}

impl Partition {
    /// Builds a partition from a per-agent assignment. Every declared leader
    /// group must have at least one member.
    pub fn new(assignment: Vec<GroupId>, leader_groups: usize) -> Result<Self, ScenarioError> {
        let mut followers = Vec::new();
        let mut leaders = vec![Vec::new(); leader_groups];
        for (i, g) in assignment.iter().enumerate() {
            match *g {
                GroupId::Follower => followers.push(i),
                GroupId::Leader(k) => match leaders.get_mut(k) {
                    Some(members) => members.push(i),
                    None => {
                        return Err(ScenarioError::PartitionIncomplete(format!(
                            "agent {i} assigned to leader group {} but only {leader_groups} declared",
                            k + 1
                        )))
                    }
                },
            }
        }
        if let Some(k) = leaders.iter().position(Vec::is_empty) {
            return Err(ScenarioError::PartitionIncomplete(format!(
                "leader group {} has no members",
                k + 1
            )));
        }
        Ok(Partition {
            assignment,
            followers,
            leaders,
        })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn group_of(&self, agent: AgentId) -> GroupId {
        self.assignment[agent]
    }

    pub fn assignment(&self) -> &[GroupId] {
        &self.assignment
    }

    /// Follower ids in ascending order.
    pub fn followers(&self) -> &[AgentId] {
        &self.followers
    }

    /// Members of leader group `k`, ascending.
    pub fn leaders(&self, k: usize) -> &[AgentId] {
        &self.leaders[k]
    }

    pub fn leader_groups(&self) -> usize {
        self.leaders.len()
    }
}

/// Opinions of all agents at one time step, stored row-major (`N × d`).
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    t: u64,
    dim: usize,
    data: Vec<f64>,
}

impl SystemState {
    pub fn from_rows(t: u64, rows: &[Vec<f64>]) -> Result<Self, ScenarioError> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(ScenarioError::DimensionMismatch {
                    what: format!("opinion of agent {i}"),
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(t, dim, data)
    }

    pub fn from_flat(t: u64, dim: usize, data: Vec<f64>) -> Result<Self, ScenarioError> {
        if dim == 0 {
            return Err(ScenarioError::ZeroDimension);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(ScenarioError::DimensionMismatch {
                what: "flat state buffer".into(),
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(ScenarioError::NonFinite(format!(
                "opinion of agent {} is not finite",
                pos / dim
            )));
        }
        Ok(SystemState { t, dim, data })
    }

    pub(crate) fn from_parts_unchecked(t: u64, dim: usize, data: Vec<f64>) -> Self {
        SystemState { t, dim, data }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn opinion(&self, agent: AgentId) -> &[f64] {
        &self.data[agent * self.dim..(agent + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ov(c: &[f64]) -> OpinionVec {
        OpinionVec::new(c.to_vec()).unwrap()
    }

    #[test]
    fn three_four_five() {
        assert_eq!(distance(&ov(&[0.0, 0.0]), &ov(&[3.0, 4.0])).unwrap(), 5.0);
    }

    #[test]
    fn self_distance_is_zero() {
        let x = ov(&[0.3, -1.7, 2.5]);
        assert_eq!(distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn scalar_distance() {
        let d = distance(&ov(&[0.2]), &ov(&[0.4])).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions() {
        let err = distance(&ov(&[0.0]), &ov(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, ScenarioError::DimensionMismatch { .. }));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(OpinionVec::new(vec![f64::NAN]).is_err());
        assert!(OpinionVec::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(OpinionVec::new(vec![]).is_err());
    }

    #[test]
    fn partition_lists() {
        use GroupId::*;
        let p = Partition::new(vec![Leader(1), Follower, Leader(0), Follower], 2).unwrap();
        assert_eq!(p.followers(), &[1, 3]);
        assert_eq!(p.leaders(0), &[2]);
        assert_eq!(p.leaders(1), &[0]);
        assert!(Partition::new(vec![Follower, Leader(0)], 2).is_err());
        assert!(Partition::new(vec![Follower, Leader(2)], 2).is_err());
    }

    fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, d)
    }

    proptest! {
        #[test]
        fn triangle_inequality(
            (a, b, c) in (1usize..6).prop_flat_map(|d| (point(d), point(d), point(d)))
        ) {
            let (a, b, c) = (ov(&a), ov(&b), ov(&c));
            let ab = distance(&a, &b).unwrap();
            let bc = distance(&b, &c).unwrap();
            let ac = distance(&a, &c).unwrap();
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12));
            prop_assert_eq!(ab, distance(&b, &a).unwrap());
            prop_assert!(ab >= 0.0);
        }
    }
}
