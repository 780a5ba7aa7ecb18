//! Validated, immutable problem instances.

use std::collections::{BTreeSet, HashMap};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    EngineOptions, GroupConfig, GroupKind, InitialOpinions, Members, RandomInit, ScenarioConfig,
    ScheduleRule,
};
use crate::error::{ScenarioError, ValidationErrors};
use crate::model::{AgentId, GroupId, OpinionVec, Partition, SystemState};
use crate::schedule::{AgentDegrees, DegreeSchedule, ScalarSchedule};

/// A mixed leader-follower problem instance. Immutable once built.
#[derive(Clone, Debug)]
pub struct Scenario {
    dimension: usize,
    epsilon: f64,
    partition: Partition,
    targets: Vec<OpinionVec>,
    initial: SystemState,
    degrees: DegreeSchedule,
    engine: EngineOptions,
    leader_names: Vec<String>,
    follower_groups: Vec<FollowerGroup>,
    /// Follower group index per agent (unused for leaders).
    follower_group_of: Vec<usize>,
    rules: Vec<ScheduleRule>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FollowerGroup {
    pub name: String,
    pub members: Vec<AgentId>,
    pub attach: Option<usize>,
}

impl Scenario {
    pub fn builder(dimension: usize, epsilon: f64) -> ScenarioBuilder {
        ScenarioBuilder::new(dimension, epsilon)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn num_agents(&self) -> usize {
        self.partition.len()
    }

    /// Number of leader groups `m`.
    pub fn num_leader_groups(&self) -> usize {
        self.partition.leader_groups()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn target(&self, k: usize) -> &OpinionVec {
        &self.targets[k]
    }

    pub fn targets(&self) -> &[OpinionVec] {
        &self.targets
    }

    pub fn initial_state(&self) -> &SystemState {
        &self.initial
    }

    pub fn degrees(&self) -> &DegreeSchedule {
        &self.degrees
    }

    pub fn engine(&self) -> &EngineOptions {
        &self.engine
    }

    pub fn leader_group_name(&self, k: usize) -> &str {
        &self.leader_names[k]
    }

    pub fn follower_groups(&self) -> &[FollowerGroup] {
        &self.follower_groups
    }

    /// Name of the declared group holding `agent`.
    pub fn group_label(&self, agent: AgentId) -> &str {
        match self.partition.group_of(agent) {
            GroupId::Leader(k) => &self.leader_names[k],
            GroupId::Follower => &self.follower_groups[self.follower_group_of[agent]].name,
        }
    }

    /// The leader group whose subsystem `agent` belongs to, if declared.
    pub fn subsystem_of(&self, agent: AgentId) -> Option<usize> {
        match self.partition.group_of(agent) {
            GroupId::Leader(k) => Some(k),
            GroupId::Follower => self.follower_groups[self.follower_group_of[agent]].attach,
        }
    }

    /// True when there are leader groups and every follower group declares
    /// the subsystem it belongs to.
    pub fn has_subsystems(&self) -> bool {
        self.num_leader_groups() > 0 && self.follower_groups.iter().all(|g| g.attach.is_some())
    }

    /// The subsystem of leader group `k` on its own: that group plus every
    /// follower attached to it, with agents renumbered in ascending original
    /// id. Returns the scenario and the original id of each new agent.
    ///
    /// Degrees are carried over as closures over the original agent ids, so
    /// seeded schedules draw the same values as in the joint run. The
    /// result has no schedule rules and cannot round-trip through a config.
    pub fn subsystem(&self, k: usize) -> (Scenario, Vec<AgentId>) {
        let ids: Vec<AgentId> = (0..self.num_agents())
            .filter(|&i| self.subsystem_of(i) == Some(k))
            .collect();
        let mut new_id = HashMap::new();
        let mut assignment = Vec::with_capacity(ids.len());
        let mut per_agent = Vec::with_capacity(ids.len());
        let mut rows = Vec::with_capacity(ids.len());
        for (n, &i) in ids.iter().enumerate() {
            new_id.insert(i, n);
            rows.push(self.initial.opinion(i).to_vec());
            match self.degrees.agent(i) {
                AgentDegrees::Leader(s) => {
                    let s = s.clone();
                    assignment.push(GroupId::Leader(0));
                    per_agent.push(AgentDegrees::Leader(ScalarSchedule::custom(move |_, t| s.value(i, 0, t))));
                }
                AgentDegrees::Follower(v) => {
                    let s = v[k].clone();
                    assignment.push(GroupId::Follower);
                    per_agent.push(AgentDegrees::Follower(vec![ScalarSchedule::custom(move |_, t| {
                        s.value(i, k, t)
                    })]));
                }
            }
        }
        let mut follower_groups = Vec::new();
        let mut follower_group_of = vec![0; ids.len()];
        for fg in self.follower_groups.iter().filter(|g| g.attach == Some(k)) {
            let members: Vec<AgentId> = fg.members.iter().map(|i| new_id[i]).collect();
            for &n in &members {
                follower_group_of[n] = follower_groups.len();
            }
            follower_groups.push(FollowerGroup {
                name: fg.name.clone(),
                members,
                attach: Some(0),
            });
        }
        let sub = Scenario {
            dimension: self.dimension,
            epsilon: self.epsilon,
            partition: Partition::new(assignment, 1).expect("subsystem has its leader group"),
            targets: vec![self.targets[k].clone()],
            initial: SystemState::from_rows(0, &rows).expect("rows of a valid state"),
            degrees: DegreeSchedule::from_agents(per_agent),
            engine: self.engine.clone(),
            leader_names: vec![self.leader_names[k].clone()],
            follower_groups,
            follower_group_of,
            rules: Vec::new(),
        };
        (sub, ids)
    }

    /// A copy with different engine options.
    pub fn with_engine(&self, engine: EngineOptions) -> Result<Scenario, ValidationErrors> {
        let mut cfg = self.to_config();
        cfg.engine = engine;
        build_scenario(&cfg)
    }

    /// A copy with a replaced initial state (same partition and schedules).
    pub fn with_initial_state(&self, state: SystemState) -> Result<Scenario, ValidationErrors> {
        if state.len() != self.num_agents() || state.dim() != self.dimension {
            return Err(ScenarioError::DimensionMismatch {
                what: "replacement initial state".into(),
                expected: self.num_agents() * self.dimension,
                found: state.len() * state.dim(),
            }
            .into());
        }
        let mut s = self.clone();
        s.initial = SystemState::from_parts_unchecked(0, state.dim(), state.as_flat().to_vec());
        Ok(s)
    }

    /// The canonical raw form: explicit member ids and explicit initial
    /// opinions. Building it again yields an identical scenario.
    pub fn to_config(&self) -> ScenarioConfig {
        let mut groups = Vec::new();
        for fg in &self.follower_groups {
            groups.push(GroupConfig {
                name: fg.name.clone(),
                kind: GroupKind::Follower,
                target: None,
                members: Members::Ids(fg.members.clone()),
                attach: fg.attach.map(|k| self.leader_names[k].clone()),
            });
        }
        for (k, name) in self.leader_names.iter().enumerate() {
            groups.push(GroupConfig {
                name: name.clone(),
                kind: GroupKind::Leader,
                target: Some(self.targets[k].coords().to_vec()),
                members: Members::Ids(self.partition.leaders(k).to_vec()),
                attach: None,
            });
        }
        ScenarioConfig {
            dimension: self.dimension,
            epsilon: self.epsilon,
            groups,
            initial_opinions: InitialOpinions::Explicit(self.initial.to_rows()),
            schedules: self.rules.clone(),
            engine: self.engine.clone(),
        }
    }
}

/// Validates a raw config into a [`Scenario`], collecting every error found.
pub fn build_scenario(cfg: &ScenarioConfig) -> Result<Scenario, ValidationErrors> {
    let mut errors = Vec::new();
    if cfg.dimension == 0 {
        errors.push(ScenarioError::ZeroDimension);
    }
    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
        errors.push(ScenarioError::EpsilonNonpositive(cfg.epsilon));
    }
    validate_engine(&cfg.engine, &mut errors);

    // Group names and kinds.
    let mut leader_names = Vec::new();
    let mut targets = Vec::new();
    let mut seen = BTreeSet::new();
    for g in &cfg.groups {
        if !seen.insert(g.name.as_str()) {
            errors.push(ScenarioError::InvalidGroup(format!("duplicate group name '{}'", g.name)));
        }
        match g.kind {
            GroupKind::Leader => {
                leader_names.push(g.name.clone());
                if g.attach.is_some() {
                    errors.push(ScenarioError::InvalidGroup(format!(
                        "leader group '{}' cannot declare 'attach'",
                        g.name
                    )));
                }
                match &g.target {
                    None => errors.push(ScenarioError::InvalidGroup(format!(
                        "leader group '{}' has no target",
                        g.name
                    ))),
                    Some(t) if t.len() != cfg.dimension => errors.push(ScenarioError::DimensionMismatch {
                        what: format!("target of '{}'", g.name),
                        expected: cfg.dimension,
                        found: t.len(),
                    }),
                    Some(t) => match OpinionVec::new(t.clone()) {
                        Ok(v) => targets.push(v),
                        Err(e) => errors.push(e),
                    },
                }
            }
            GroupKind::Follower => {
                if g.target.is_some() {
                    errors.push(ScenarioError::InvalidGroup(format!(
                        "follower group '{}' cannot have a target",
                        g.name
                    )));
                }
            }
        }
    }
    let leader_index: HashMap<&str, usize> =
        leader_names.iter().enumerate().map(|(k, n)| (n.as_str(), k)).collect();

    // Member ids.
    let member_lists = match assign_members(&cfg.groups) {
        Ok(lists) => lists,
        Err(e) => {
            errors.push(e);
            return Err(ValidationErrors(errors));
        }
    };
    let n: usize = member_lists.iter().map(Vec::len).sum();
    let errors_before_partition = errors.len();
    let mut assignment: Vec<Option<GroupId>> = vec![None; n];
    let mut follower_group_of = vec![usize::MAX; n];
    let mut follower_groups = Vec::new();
    let mut leader_k = 0;
    for (g, members) in cfg.groups.iter().zip(&member_lists) {
        let gid = match g.kind {
            GroupKind::Leader => {
                leader_k += 1;
                GroupId::Leader(leader_k - 1)
            }
            GroupKind::Follower => {
                let attach = match &g.attach {
                    None => None,
                    Some(name) => match leader_index.get(name.as_str()) {
                        Some(&k) => Some(k),
                        None => {
                            errors.push(ScenarioError::UnknownGroup(name.clone()));
                            None
                        }
                    },
                };
                for &i in members {
                    if i < n {
                        follower_group_of[i] = follower_groups.len();
                    }
                }
                follower_groups.push(FollowerGroup {
                    name: g.name.clone(),
                    members: members.clone(),
                    attach,
                });
                GroupId::Follower
            }
        };
        for &i in members {
            match assignment.get_mut(i) {
                Some(slot @ None) => *slot = Some(gid),
                Some(Some(_)) => errors.push(ScenarioError::PartitionIncomplete(format!(
                    "agent {i} belongs to more than one group"
                ))),
                None => errors.push(ScenarioError::PartitionIncomplete(format!(
                    "agent id {i} out of range for {n} agents"
                ))),
            }
        }
    }
    if let Some(i) = assignment.iter().position(Option::is_none) {
        errors.push(ScenarioError::PartitionIncomplete(format!("agent {i} has no group")));
    }
    if errors.len() > errors_before_partition {
        return Err(ValidationErrors(errors));
    }
    let assignment: Vec<GroupId> = assignment.into_iter().map(Option::unwrap).collect();
    let partition = Partition::new(assignment, leader_names.len()).map_err(ValidationErrors::from)?;
    if n == 0 {
        return Err(ScenarioError::PartitionIncomplete("scenario has no agents".into()).into());
    }

    let initial = match initial_state(&cfg.initial_opinions, n, cfg.dimension) {
        Ok(s) => Some(s),
        Err(e) => {
            errors.push(e);
            None
        }
    };

    let mut degrees = DegreeSchedule::neutral(&partition);
    let group_members: HashMap<&str, (GroupKind, &Vec<usize>)> = cfg
        .groups
        .iter()
        .zip(&member_lists)
        .map(|(g, m)| (g.name.as_str(), (g.kind, m)))
        .collect();
    for (r, rule) in cfg.schedules.iter().enumerate() {
        if let Err(e) = apply_rule(rule, &partition, &group_members, &leader_index, &mut degrees) {
            errors.push(match e {
                ScenarioError::InvalidSchedule(msg) => {
                    ScenarioError::InvalidSchedule(format!("rule {r}: {msg}"))
                }
                other => other,
            });
        }
    }
    errors.extend(degrees.validate());

    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }
    Ok(Scenario {
        dimension: cfg.dimension,
        epsilon: cfg.epsilon,
        partition,
        targets,
        initial: initial.expect("initial state validated"),
        degrees,
        engine: cfg.engine.clone(),
        leader_names,
        follower_groups,
        follower_group_of,
        rules: cfg.schedules.clone(),
    })
}

fn validate_engine(e: &EngineOptions, errors: &mut Vec<ScenarioError>) {
    if e.record_every == 0 {
        errors.push(ScenarioError::InvalidEngine("record_every must be at least 1".into()));
    }
    if e.grid_dim_cap == 0 {
        errors.push(ScenarioError::InvalidEngine("grid_dim_cap must be at least 1".into()));
    }
    if let Some(stop) = &e.stop {
        if stop.window == 0 {
            errors.push(ScenarioError::InvalidEngine("stop window must be at least 1".into()));
        }
        if !(stop.tol.is_finite() && stop.tol >= 0.0) {
            errors.push(ScenarioError::InvalidEngine(format!("stop tol {} invalid", stop.tol)));
        }
    }
}

/// Explicit id lists are taken as given; counts take the lowest unclaimed
/// ids in declaration order.
fn assign_members(groups: &[GroupConfig]) -> Result<Vec<Vec<usize>>, ScenarioError> {
    let claimed: BTreeSet<usize> = groups
        .iter()
        .filter_map(|g| match &g.members {
            Members::Ids(ids) => Some(ids.iter().copied()),
            Members::Count(_) => None,
        })
        .flatten()
        .collect();
    let mut next = 0usize;
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        match &g.members {
            Members::Ids(ids) => {
                let mut ids = ids.clone();
                ids.sort_unstable();
                out.push(ids);
            }
            Members::Count(c) => {
                if *c > 10_000_000 {
                    return Err(ScenarioError::InvalidGroup(format!(
                        "group '{}' declares {c} members",
                        g.name
                    )));
                }
                let mut ids = Vec::with_capacity(*c);
                while ids.len() < *c {
                    if !claimed.contains(&next) {
                        ids.push(next);
                    }
                    next += 1;
                }
                out.push(ids);
            }
        }
    }
    Ok(out)
}

fn initial_state(init: &InitialOpinions, n: usize, dim: usize) -> Result<SystemState, ScenarioError> {
    match init {
        InitialOpinions::Explicit(rows) => {
            if rows.len() != n {
                return Err(ScenarioError::PartitionIncomplete(format!(
                    "{} initial opinions for {n} agents",
                    rows.len()
                )));
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != dim {
                    return Err(ScenarioError::DimensionMismatch {
                        what: format!("initial opinion of agent {i}"),
                        expected: dim,
                        found: r.len(),
                    });
                }
            }
            SystemState::from_rows(0, rows)
        }
        InitialOpinions::Random(r) => random_initial_state(r, n, dim),
    }
}

/// Uniform draws in a box. Coordinate `c` of agent `i` depends only on
/// `(seed, i, c)`, so growing `N` leaves existing agents' draws unchanged.
pub fn random_initial_state(r: &RandomInit, n: usize, dim: usize) -> Result<SystemState, ScenarioError> {
    let mut bounds = Vec::with_capacity(dim);
    for c in 0..dim {
        let (lo, hi) = match (r.low.coord(c), r.high.coord(c)) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => {
                return Err(ScenarioError::DimensionMismatch {
                    what: "random box bounds".into(),
                    expected: dim,
                    found: c,
                })
            }
        };
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ScenarioError::NonFinite(format!("random box [{lo}, {hi}] on coordinate {c}")));
        }
        bounds.push((lo, hi));
    }
    let mut data = Vec::with_capacity(n * dim);
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    for i in 0..n {
        rng.set_stream(i as u64);
        rng.set_word_pos(0);
        for &(lo, hi) in &bounds {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            data.push(lo + (hi - lo) * u);
        }
    }
    SystemState::from_flat(0, dim, data)
}

fn apply_rule(
    rule: &ScheduleRule,
    partition: &Partition,
    groups: &HashMap<&str, (GroupKind, &Vec<usize>)>,
    leader_index: &HashMap<&str, usize>,
    degrees: &mut DegreeSchedule,
) -> Result<(), ScenarioError> {
    let agents: Vec<AgentId> = match (&rule.group, rule.agent) {
        (Some(name), None) => match groups.get(name.as_str()) {
            Some((_, members)) => members.to_vec(),
            None => return Err(ScenarioError::UnknownGroup(name.clone())),
        },
        (None, Some(a)) if a < partition.len() => vec![a],
        (None, Some(a)) => {
            return Err(ScenarioError::InvalidSchedule(format!("agent {a} out of range")))
        }
        _ => {
            return Err(ScenarioError::InvalidSchedule(
                "exactly one of 'group' or 'agent' must be given".into(),
            ))
        }
    };
    let component = match &rule.leader_group {
        None => None,
        Some(name) => match leader_index.get(name.as_str()) {
            Some(&k) => Some(k),
            None => return Err(ScenarioError::UnknownGroup(name.clone())),
        },
    };
    for a in agents {
        match (partition.group_of(a), component) {
            (GroupId::Leader(_), None) => degrees.set_alpha(a, rule.schedule.clone())?,
            (GroupId::Follower, Some(k)) => degrees.set_beta(a, k, rule.schedule.clone())?,
            (GroupId::Leader(_), Some(_)) => {
                return Err(ScenarioError::InvalidSchedule(format!(
                    "agent {a} is a leader; 'leader_group' applies to follower β only"
                )))
            }
            (GroupId::Follower, None) => {
                return Err(ScenarioError::InvalidSchedule(format!(
                    "agent {a} is a follower; its rule needs 'leader_group'"
                )))
            }
        }
    }
    Ok(())
}

/// Programmatic construction. Agents get ids in the order they are added.
#[derive(Clone, Debug)]
pub struct ScenarioBuilder {
    dimension: usize,
    epsilon: f64,
    groups: Vec<GroupConfig>,
    rows: Vec<(usize, Vec<f64>)>,
    schedules: Vec<ScheduleRule>,
    engine: EngineOptions,
}

impl ScenarioBuilder {
    pub fn new(dimension: usize, epsilon: f64) -> Self {
        ScenarioBuilder {
            dimension,
            epsilon,
            groups: Vec::new(),
            rows: Vec::new(),
            schedules: Vec::new(),
            engine: EngineOptions::default(),
        }
    }

    fn group_slot(&mut self, name: &str, kind: GroupKind, target: Option<Vec<f64>>, attach: Option<&str>) -> usize {
        if let Some(pos) = self.groups.iter().position(|g| g.name == name) {
            return pos;
        }
        self.groups.push(GroupConfig {
            name: name.to_string(),
            kind,
            target,
            members: Members::Ids(Vec::new()),
            attach: attach.map(str::to_string),
        });
        self.groups.len() - 1
    }

    /// Declares leader group `name` with target `g`. Declaration order fixes `k`.
    pub fn leader_group(mut self, name: &str, target: impl Into<Vec<f64>>) -> Self {
        self.group_slot(name, GroupKind::Leader, Some(target.into()), None);
        self
    }

    /// Declares a follower group belonging to `attach`'s subsystem.
    pub fn follower_group(mut self, name: &str, attach: Option<&str>) -> Self {
        self.group_slot(name, GroupKind::Follower, None, attach);
        self
    }

    /// Adds one agent to a declared group (a follower group named `name` is
    /// created on first use).
    pub fn agent(mut self, group: &str, opinion: impl Into<Vec<f64>>) -> Self {
        let slot = match self.groups.iter().position(|g| g.name == group) {
            Some(p) => p,
            None => self.group_slot(group, GroupKind::Follower, None, None),
        };
        let id = self.rows.len();
        if let Members::Ids(ids) = &mut self.groups[slot].members {
            ids.push(id);
        }
        self.rows.push((slot, opinion.into()));
        self
    }

    pub fn follower(self, opinion: impl Into<Vec<f64>>) -> Self {
        self.agent("F", opinion)
    }

    pub fn agents<I, V>(mut self, group: &str, opinions: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: Into<Vec<f64>>,
    {
        for o in opinions {
            self = self.agent(group, o);
        }
        self
    }

    /// `α` for every member of a leader group.
    pub fn alpha(mut self, leader_group: &str, schedule: ScalarSchedule) -> Self {
        self.schedules.push(ScheduleRule {
            group: Some(leader_group.into()),
            agent: None,
            leader_group: None,
            schedule,
        });
        self
    }

    /// `β^k` (k = `leader_group`) for every member of a follower group.
    pub fn beta(mut self, follower_group: &str, leader_group: &str, schedule: ScalarSchedule) -> Self {
        self.schedules.push(ScheduleRule {
            group: Some(follower_group.into()),
            agent: None,
            leader_group: Some(leader_group.into()),
            schedule,
        });
        self
    }

    pub fn agent_alpha(mut self, agent: AgentId, schedule: ScalarSchedule) -> Self {
        self.schedules.push(ScheduleRule {
            group: None,
            agent: Some(agent),
            leader_group: None,
            schedule,
        });
        self
    }

    pub fn agent_beta(mut self, agent: AgentId, leader_group: &str, schedule: ScalarSchedule) -> Self {
        self.schedules.push(ScheduleRule {
            group: None,
            agent: Some(agent),
            leader_group: Some(leader_group.into()),
            schedule,
        });
        self
    }

    pub fn engine(mut self, engine: EngineOptions) -> Self {
        self.engine = engine;
        self
    }

    pub fn horizon(mut self, horizon: u64) -> Self {
        self.engine.horizon = horizon;
        self
    }

    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            dimension: self.dimension,
            epsilon: self.epsilon,
            groups: self.groups.clone(),
            initial_opinions: InitialOpinions::Explicit(self.rows.iter().map(|(_, r)| r.clone()).collect()),
            schedules: self.schedules.clone(),
            engine: self.engine.clone(),
        }
    }

    pub fn build(&self) -> Result<Scenario, ValidationErrors> {
        build_scenario(&self.to_config())
    }
}
