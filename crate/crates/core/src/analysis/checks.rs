use crate::analysis::metrics::{degree_extremes, measured_gamma};
use crate::analysis::report::{CheckError, TheoremReport};
use crate::analysis::euclid;
use crate::dynamics::{Simulator, Trajectory};
use crate::model::{AgentId, GroupId, SystemState};
use crate::scenario::Scenario;
use crate::tolerances::{CONSENSUS_TOL, INEQUALITY_SLACK, ROUNDOFF, STABILIZATION_TOL};

/// Relative widening of the ε-ball when a check decides neighborhood
/// membership itself. A wider set can only raise the right-hand side of the
/// contraction bound, so boundary rounding never produces a false failure.
const NEIGHBOR_WIDENING: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    /// Allowed negative slack on every inequality.
    pub slack: f64,
    /// Final distance that counts as having reached the limit.
    pub consensus_tol: f64,
    pub stabilization_tol: f64,
    /// Trailing steps over which degrees must be constant to count as converged.
    pub stabilization_window: usize,
    /// Slack on ball containment.
    pub roundoff: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            slack: INEQUALITY_SLACK,
            consensus_tol: CONSENSUS_TOL,
            stabilization_tol: STABILIZATION_TOL,
            stabilization_window: 10,
            roundoff: ROUNDOFF,
        }
    }
}

fn inapplicable(msg: impl Into<String>) -> CheckError {
    CheckError::InapplicableHypothesis(msg.into())
}

fn group_radius(state: &SystemState, members: &[AgentId], g: &[f64]) -> f64 {
    members.iter().map(|&i| euclid(state.opinion(i), g)).fold(0.0, f64::max)
}

/// Per-step leader contraction:
/// `‖x_i(t+1) − g_k‖ ≤ α_i(t) · max_{j ∈ N_i(t)} ‖x_j(t) − g_k‖` for every
/// leader, and `C_{t+1}^k ≤ max_i α_i(t) · C_t^k` for every group.
pub fn check_lemma_contraction(
    state_t: &SystemState,
    state_t1: &SystemState,
    scenario: &Scenario,
    opts: &CheckOptions,
) -> Result<TheoremReport, CheckError> {
    let mut report = TheoremReport::new("lemma1", opts.slack);
    contraction_step(state_t, state_t1, scenario, &mut report)?;
    Ok(report)
}

fn contraction_step(
    state_t: &SystemState,
    state_t1: &SystemState,
    scenario: &Scenario,
    report: &mut TheoremReport,
) -> Result<(), CheckError> {
    let m = scenario.num_leader_groups();
    if m == 0 {
        return Err(inapplicable("no leader groups"));
    }
    let t = state_t.t();
    let reach = scenario.epsilon() * (1.0 + NEIGHBOR_WIDENING);
    for k in 0..m {
        let g = scenario.target(k).coords();
        let members = scenario.partition().leaders(k);
        let name = scenario.leader_group_name(k);
        let mut worst: Option<(AgentId, f64, f64)> = None;
        let mut max_alpha = 0.0f64;
        for &i in members {
            let alpha = scenario.degrees().alpha(i, t).expect("leader");
            max_alpha = max_alpha.max(alpha);
            let xi = state_t.opinion(i);
            let reach_max = members
                .iter()
                .filter(|&&j| euclid(xi, state_t.opinion(j)) <= reach)
                .map(|&j| euclid(state_t.opinion(j), g))
                .fold(0.0, f64::max);
            let lhs = euclid(state_t1.opinion(i), g);
            let rhs = alpha * reach_max;
            if worst.is_none_or(|(_, l, r)| rhs - lhs < r - l) {
                worst = Some((i, lhs, rhs));
            }
        }
        if let Some((i, lhs, rhs)) = worst {
            report.push(t, format!("{name} agent {i}"), lhs, rhs);
        }
        let c_t = group_radius(state_t, members, g);
        let c_t1 = group_radius(state_t1, members, g);
        report.push(t, format!("{name} group"), c_t1, max_alpha * c_t);
    }
    Ok(())
}

/// [`check_lemma_contraction`] over every step of a trajectory.
pub fn check_lemma_contraction_trajectory(
    trajectory: &Trajectory,
    opts: &CheckOptions,
) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    let mut report = TheoremReport::new("lemma1", opts.slack);
    if sc.num_leader_groups() == 0 {
        return Err(inapplicable("no leader groups"));
    }
    for pair in trajectory.states().windows(2) {
        contraction_step(&pair[0], &pair[1], sc, &mut report)?;
    }
    Ok(report)
}

/// Leader-group convergence to the target under a uniform degree bound:
/// `C_t ≤ δ^t · C_0` for every `t`, and `C_T ≤ target_tol` once
/// `T ≥ log(target_tol / C_0) / log δ`.
pub fn check_theorem_target(
    trajectory: &Trajectory,
    k: usize,
    delta: f64,
    target_tol: f64,
    opts: &CheckOptions,
) -> Result<TheoremReport, CheckError> {
    target_envelope(trajectory, k, delta, target_tol, true, opts)
}

/// Subsequence form: only steps whose max leader degree is at most `δ`
/// contract the envelope; other steps (degree up to 1) leave it unchanged.
pub fn check_theorem_target_subsequence(
    trajectory: &Trajectory,
    k: usize,
    delta: f64,
    target_tol: f64,
    opts: &CheckOptions,
) -> Result<TheoremReport, CheckError> {
    target_envelope(trajectory, k, delta, target_tol, false, opts)
}

fn target_envelope(
    trajectory: &Trajectory,
    k: usize,
    delta: f64,
    target_tol: f64,
    uniform: bool,
    opts: &CheckOptions,
) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    if k >= sc.num_leader_groups() {
        return Err(inapplicable(format!("no leader group {}", k + 1)));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(inapplicable(format!("δ = {delta} not in [0, 1)")));
    }
    let name = sc.leader_group_name(k);
    let members = sc.partition().leaders(k);
    let g = sc.target(k).coords();
    let mut report = TheoremReport::new(if uniform { "thm2" } else { "thm2-subsequence" }, opts.slack);
    report.parameters.delta = Some(delta);

    // contracting steps among 0..T
    let steps = trajectory.steps();
    let mut contracting = Vec::with_capacity(steps);
    for s in 0..steps as u64 {
        let a = degree_extremes(sc, s).max_alpha[k];
        if a <= delta {
            contracting.push(true);
        } else if uniform {
            return Err(inapplicable(format!("max α of {name} is {a} > δ = {delta} at t = {s}")));
        } else {
            contracting.push(false);
        }
    }
    if !uniform && steps > 0 && !contracting.iter().any(|&c| c) {
        return Err(inapplicable(format!("no step with max α of {name} ≤ δ = {delta}")));
    }

    let c0 = group_radius(trajectory.initial(), members, g);
    let mut n = 0i32;
    for (t, state) in trajectory.states().iter().enumerate() {
        if t > 0 && contracting[t - 1] {
            n += 1;
        }
        let c = group_radius(state, members, g);
        report.push(t as u64, format!("{name} envelope"), c, delta.powi(n) * c0);
    }

    let required = if c0 <= target_tol {
        0
    } else if delta == 0.0 {
        1
    } else {
        ((target_tol / c0).ln() / delta.ln()).ceil() as i64
    };
    report.note(format!("{required} contracting steps needed to reach {target_tol}"));
    if i64::from(n) >= required {
        let c_t = group_radius(trajectory.last(), members, g);
        report.push(steps as u64, format!("{name} final"), c_t, target_tol);
    } else {
        report.note(format!("only {n} contracting steps in horizon; final bound not certified"));
    }
    Ok(report)
}

/// Single-leader clause: `‖x_i(t) − g‖ ≤ α_i(t−1) · C_{t−1}` at every step,
/// and the leader ends within `consensus_tol` of its target.
pub fn check_theorem_target_agent(
    trajectory: &Trajectory,
    agent: AgentId,
    opts: &CheckOptions,
) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    let GroupId::Leader(k) = sc.partition().group_of(agent) else {
        return Err(inapplicable(format!("agent {agent} is not a leader")));
    };
    let g = sc.target(k).coords();
    let members = sc.partition().leaders(k);
    let mut report = TheoremReport::new("thm2-agent", opts.slack);
    for pair in trajectory.states().windows(2) {
        let t = pair[0].t();
        let alpha = sc.degrees().alpha(agent, t).expect("leader");
        let lhs = euclid(pair[1].opinion(agent), g);
        report.push(t + 1, format!("agent {agent}"), lhs, alpha * group_radius(&pair[0], members, g));
    }
    let fin = euclid(trajectory.last().opinion(agent), g);
    report.push(trajectory.steps() as u64, format!("agent {agent} final"), fin, opts.consensus_tol);
    Ok(report)
}

/// Once every opinion lies in `B(center, radius)`, it stays there.
pub fn check_ball_invariance(
    trajectory: &Trajectory,
    center: &[f64],
    radius: f64,
    opts: &CheckOptions,
) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    match sc.num_leader_groups() {
        0 => {}
        1 if sc.target(0).coords() == center => {}
        1 => return Err(inapplicable("ball must be centered at the leader target")),
        m => return Err(inapplicable(format!("{m} leader groups; invariance needs one"))),
    }
    let mut report = TheoremReport::new("lemma3", opts.roundoff);
    report.parameters.radius = Some(radius);
    let extent = |s: &SystemState| s.rows().map(|x| euclid(x, center)).fold(0.0, f64::max);
    let onset = trajectory
        .states()
        .iter()
        .position(|s| extent(s) <= radius + opts.roundoff);
    match onset {
        None => report.note("opinions never entered the ball; vacuous"),
        Some(t0) => {
            report.parameters.hypothesis_step = Some(t0 as u64);
            for s in &trajectory.states()[t0 + 1..] {
                report.push(s.t(), "max distance to center", extent(s), radius);
            }
        }
    }
    Ok(report)
}

/// Consensus at the target of a single leader group, with the explicit
/// bound `A_{t+1} ≤ γ^{t−p+1} A_p + (t−p+1) γ^{t−p} C_p` for `t ≥ p`.
///
/// `δ`, `γ` and `p` are measured from the run: `t*` is the first step with
/// every opinion within `δ < ε` of `g`; `γ` is the sup over `s ≥ t*` of the
/// degree extremes; `p ≥ t*` is the first step from which `C_s < ε − δ`
/// holds for the rest of the trajectory.
pub fn check_theorem_consensus(trajectory: &Trajectory, opts: &CheckOptions) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    if sc.num_leader_groups() != 1 {
        return Err(inapplicable(format!(
            "{} leader groups; consensus bound needs exactly one",
            sc.num_leader_groups()
        )));
    }
    let eps = sc.epsilon();
    let g = sc.target(0).coords();
    let leaders = sc.partition().leaders(0);
    let followers = sc.partition().followers();
    let states = trajectory.states();
    let all_radius = |s: &SystemState| s.rows().map(|x| euclid(x, g)).fold(0.0, f64::max);

    let Some(t_star) = states.iter().position(|s| all_radius(s) < eps) else {
        return Err(inapplicable("no step with all opinions inside B(g, δ), δ < ε"));
    };
    let delta = all_radius(&states[t_star]);
    let steps = trajectory.steps() as u64;
    let gamma = measured_gamma(sc, t_star as u64, steps);
    if gamma >= 1.0 {
        return Err(inapplicable(format!("γ = {gamma} ≥ 1 over the horizon")));
    }

    let mut report = TheoremReport::new("thm4", opts.slack);
    report.parameters.delta = Some(delta);
    report.parameters.gamma = Some(gamma);
    report.parameters.hypothesis_step = Some(t_star as u64);
    report.note("hypothesis measured over horizon");

    let c: Vec<f64> = states.iter().map(|s| group_radius(s, leaders, g)).collect();
    let a: Vec<f64> = states.iter().map(|s| group_radius(s, followers, g)).collect();
    let mut p = None;
    for s in (t_star..states.len()).rev() {
        if c[s] < eps - delta {
            p = Some(s);
        } else {
            break;
        }
    }
    match p {
        None => report.note("C_s < ε − δ not reached within horizon; bound phase not entered"),
        Some(p) => {
            report.parameters.onset = Some(p as u64);
            for t in p..states.len() - 1 {
                let e = (t - p) as i32;
                let bound = gamma.powi(e + 1) * a[p] + f64::from(e + 1) * gamma.powi(e) * c[p];
                report.push(t as u64 + 1, "A_{t+1}", a[t + 1], bound);
            }
        }
    }
    report.push(steps, "final max distance to g", all_radius(trajectory.last()), opts.consensus_tol);
    Ok(report)
}

/// With several leader groups and converged follower degrees, each
/// follower approaches `Σ_k (β_i^k / Σ_j β_i^j) g_k` and each leader its own
/// target.
pub fn check_corollary_mixture(trajectory: &Trajectory, opts: &CheckOptions) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    let m = sc.num_leader_groups();
    if m == 0 {
        return Err(inapplicable("no leader groups"));
    }
    let eps = sc.epsilon();
    let steps = trajectory.steps() as u64;
    let window = (opts.stabilization_window as u64).min(steps);
    let degrees = sc.degrees();

    let mut limits = Vec::new();
    for &i in sc.partition().followers() {
        let final_betas = degrees.betas(i, steps).expect("follower");
        for s in steps - window..steps {
            let b = degrees.betas(i, s).expect("follower");
            if b.iter().zip(&final_betas).any(|(x, y)| (x - y).abs() > opts.stabilization_tol) {
                return Err(inapplicable(format!("β of agent {i} not stabilized over the trailing window")));
            }
        }
        let total: f64 = final_betas.iter().sum();
        if total == 0.0 {
            return Err(CheckError::UndefinedLimit { agent: i });
        }
        let mut limit = vec![0.0; sc.dimension()];
        for (k, b) in final_betas.iter().enumerate() {
            for (l, gk) in limit.iter_mut().zip(sc.target(k).coords()) {
                *l += b / total * gk;
            }
        }
        limits.push((i, limit));
    }

    // hypothesis: opinions and all targets inside some B(g_j, δ), δ < ε
    let targets = sc.targets();
    let hyp = trajectory.states().iter().enumerate().find_map(|(t, s)| {
        (0..m).find_map(|j| {
            let gj = targets[j].coords();
            let r = s
                .rows()
                .map(|x| euclid(x, gj))
                .chain(targets.iter().map(|gk| euclid(gk.coords(), gj)))
                .fold(0.0, f64::max);
            (r < eps).then_some((t, j, r))
        })
    });
    let Some((t_star, j, delta)) = hyp else {
        return Err(inapplicable("no step with opinions and targets inside B(g_j, δ), δ < ε"));
    };
    let gamma = measured_gamma(sc, t_star as u64, steps);
    if gamma >= 1.0 {
        return Err(inapplicable(format!("γ = {gamma} ≥ 1 over the horizon")));
    }

    let mut report = TheoremReport::new("cor1", opts.slack);
    report.parameters.delta = Some(delta);
    report.parameters.gamma = Some(gamma);
    report.parameters.hypothesis_step = Some(t_star as u64);
    report.note(format!("ball centered at target of {}", sc.leader_group_name(j)));
    report.note("hypothesis measured over horizon");
    let last = trajectory.last();
    for (i, limit) in &limits {
        report.push(steps, format!("follower {i} to mixture"), euclid(last.opinion(*i), limit), opts.consensus_tol);
    }
    for k in 0..m {
        let g = sc.target(k).coords();
        for &i in sc.partition().leaders(k) {
            report.push(steps, format!("leader {i} to target"), euclid(last.opinion(i), g), opts.consensus_tol);
        }
    }
    Ok(report)
}

/// Independent subsystems (each leader group plus its attached followers)
/// each reach their own target. Fails with `CrossTalk` if the joint run ever
/// puts a follower within ε of an agent from another subsystem.
pub fn check_corollary_subsystems(trajectory: &Trajectory, opts: &CheckOptions) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    if !sc.has_subsystems() {
        return Err(inapplicable("followers are not assigned to subsystems"));
    }
    let eps = sc.epsilon();
    let n = sc.num_agents();
    let owner: Vec<usize> = (0..n).map(|i| sc.subsystem_of(i).expect("assigned")).collect();
    for s in trajectory.states() {
        for &i in sc.partition().followers() {
            let xi = s.opinion(i);
            if let Some(j) = (0..n).find(|&j| owner[j] != owner[i] && euclid(xi, s.opinion(j)) <= eps) {
                return Err(CheckError::CrossTalk { t: s.t(), a: i, b: j });
            }
        }
    }

    let steps = trajectory.steps() as u64;
    let mut report = TheoremReport::new("cor2", opts.slack);
    for k in 0..sc.num_leader_groups() {
        let name = sc.leader_group_name(k);
        let (sub, ids) = sc.subsystem(k);
        let g = sc.target(k).coords();
        let sub_run = Simulator::new(sub)
            .run_with(steps, None)
            .map_err(|e| inapplicable(format!("subsystem {name} failed to run: {e}")))?;
        let sub_report = check_theorem_consensus(&sub_run, opts)
            .map_err(|e| inapplicable(format!("subsystem {name}: {e}")))?;
        report.absorb(&format!("{name}: "), sub_report);
        let joint = ids
            .iter()
            .map(|&i| euclid(trajectory.last().opinion(i), g))
            .fold(0.0, f64::max);
        report.push(steps, format!("{name}: joint run final max distance"), joint, opts.consensus_tol);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run, Fault};
    use crate::schedule::ScalarSchedule;

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    fn leaders(xs: &[f64], alpha: f64) -> Scenario {
        Scenario::builder(1, 1.0)
            .leader_group("L1", [0.0])
            .agents("L1", xs.iter().map(|&x| [x]))
            .alpha("L1", ScalarSchedule::constant(alpha))
            .build()
            .unwrap()
    }

    fn demo() -> Scenario {
        Scenario::builder(1, 1.0)
            .leader_group("L1", [0.0])
            .follower([0.3])
            .agent("L1", [0.1])
            .alpha("L1", ScalarSchedule::constant(0.5))
            .beta("F", "L1", ScalarSchedule::constant(0.5))
            .build()
            .unwrap()
    }

    #[test]
    fn contraction_example_slack() {
        let s = leaders(&[0.2, 0.4], 0.5);
        let tr = run(&s, 1, None).unwrap();
        let r = check_lemma_contraction(tr.state(0), tr.state(1), &s, &opts()).unwrap();
        assert!(r.passed);
        let agent = &r.records[0];
        assert!((agent.lhs - 0.15).abs() < 1e-15);
        assert!((agent.rhs - 0.2).abs() < 1e-15);
        assert!((agent.slack - 0.05).abs() < 1e-15);
    }

    #[test]
    fn contraction_full_pull() {
        let s = leaders(&[0.2, 0.4], 0.0);
        let tr = run(&s, 1, None).unwrap();
        let r = check_lemma_contraction(tr.state(0), tr.state(1), &s, &opts()).unwrap();
        assert!(r.records.iter().all(|rec| rec.lhs == 0.0 && rec.rhs == 0.0));
        assert!(r.passed);
    }

    #[test]
    fn contraction_needs_leaders() {
        let s = Scenario::builder(1, 1.0).follower([0.0]).build().unwrap();
        let tr = run(&s, 2, None).unwrap();
        assert!(matches!(
            check_lemma_contraction_trajectory(&tr, &opts()),
            Err(CheckError::InapplicableHypothesis(_))
        ));
    }

    #[test]
    fn contraction_catches_mean_shift() {
        let sim = Simulator::new(demo()).with_fault(Some(Fault::MEAN_SHIFT_DEFAULT));
        let tr = sim.run_with(20, None).unwrap();
        let r = check_lemma_contraction_trajectory(&tr, &opts()).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn target_envelope_is_tight_for_halving() {
        let s = leaders(&[1.0], 0.5);
        let tr = run(&s, 40, None).unwrap();
        let mut o = opts();
        o.slack = 0.0;
        let r = check_theorem_target(&tr, 0, 0.5, 1e-9, &o).unwrap();
        assert!(r.passed);
        for rec in r.records.iter().filter(|r| r.subject.ends_with("envelope")) {
            assert_eq!(rec.slack, 0.0);
        }
        assert!(r.records.iter().any(|r| r.subject.ends_with("final")));
    }

    #[test]
    fn target_horizon_for_point_nine() {
        // ceil(ln(1e-9) / ln(0.9)) = 197
        let s = leaders(&[1.0], 0.9);
        let short = run(&s, 196, None).unwrap();
        let r = check_theorem_target(&short, 0, 0.9, 1e-9, &opts()).unwrap();
        assert!(!r.records.iter().any(|r| r.subject.ends_with("final")));
        let long = run(&s, 197, None).unwrap();
        let r = check_theorem_target(&long, 0, 0.9, 1e-9, &opts()).unwrap();
        let fin = r.records.iter().find(|r| r.subject.ends_with("final")).unwrap();
        assert!(fin.pass);
        assert!(r.passed);
    }

    #[test]
    fn target_fixed_point() {
        let s = leaders(&[0.0, 0.0], 0.7);
        let tr = run(&s, 10, None).unwrap();
        let r = check_theorem_target(&tr, 0, 0.7, 1e-9, &opts()).unwrap();
        assert!(r.records.iter().all(|rec| rec.lhs == 0.0));
    }

    #[test]
    fn target_inapplicable_when_delta_too_small() {
        let s = leaders(&[1.0], 0.9);
        let tr = run(&s, 5, None).unwrap();
        assert!(matches!(
            check_theorem_target(&tr, 0, 0.5, 1e-9, &opts()),
            Err(CheckError::InapplicableHypothesis(_))
        ));
    }

    #[test]
    fn subsequence_envelope_with_alternating_table() {
        let table: Vec<f64> = (0..60).map(|t| if t % 2 == 0 { 1.0 } else { 0.6 }).collect();
        let s = Scenario::builder(1, 1.0)
            .leader_group("L1", [0.0])
            .agents("L1", [[0.5], [0.9], [-0.4]])
            .alpha("L1", ScalarSchedule::table(table))
            .build()
            .unwrap();
        let tr = run(&s, 60, None).unwrap();
        assert!(check_theorem_target(&tr, 0, 0.6, 1e-6, &opts()).is_err());
        let r = check_theorem_target_subsequence(&tr, 0, 0.6, 1e-6, &opts()).unwrap();
        assert!(r.passed, "{:?}", r.worst());
    }

    #[test]
    fn ball_invariance_from_start() {
        let tr = run(&demo(), 50, None).unwrap();
        let r = check_ball_invariance(&tr, &[0.0], 0.3, &opts()).unwrap();
        assert_eq!(r.parameters.hypothesis_step, Some(0));
        assert_eq!(r.records.len(), 50);
        assert!(r.passed);
    }

    #[test]
    fn ball_never_entered_is_vacuous() {
        let tr = run(&demo(), 5, None).unwrap();
        let r = check_ball_invariance(&tr, &[0.0], 1e-30, &opts()).unwrap();
        assert!(r.records.is_empty());
        assert!(r.passed);
    }

    #[test]
    fn consensus_demo() {
        let tr = run(&demo(), 60, None).unwrap();
        let r = check_theorem_consensus(&tr, &opts()).unwrap();
        assert_eq!(r.parameters.gamma, Some(0.5));
        assert_eq!(r.parameters.onset, Some(0));
        assert!(r.passed, "{:?}", r.worst());
    }

    #[test]
    fn consensus_gate_on_zero_beta() {
        let s = Scenario::builder(1, 1.0)
            .leader_group("L1", [0.0])
            .follower([0.3])
            .agent("L1", [0.1])
            .alpha("L1", ScalarSchedule::constant(0.5))
            .build()
            .unwrap();
        let tr = run(&s, 10, None).unwrap();
        assert!(matches!(check_theorem_consensus(&tr, &opts()), Err(CheckError::InapplicableHypothesis(_))));
    }

    #[test]
    fn consensus_at_fixed_point() {
        let s = Scenario::builder(1, 1.0)
            .leader_group("L1", [0.0])
            .follower([0.0])
            .agent("L1", [0.0])
            .alpha("L1", ScalarSchedule::constant(0.5))
            .beta("F", "L1", ScalarSchedule::constant(0.5))
            .build()
            .unwrap();
        let tr = run(&s, 5, None).unwrap();
        let r = check_theorem_consensus(&tr, &opts()).unwrap();
        assert!(r.records.iter().all(|rec| rec.lhs == 0.0));
        assert!(r.passed);
    }

    fn two_targets(beta: (f64, f64)) -> Scenario {
        Scenario::builder(1, 2.0)
            .leader_group("L1", [0.0])
            .leader_group("L2", [1.0])
            .agents("F", [[0.4], [0.6]])
            .agent("L1", [0.2])
            .agent("L2", [0.8])
            .alpha("L1", ScalarSchedule::constant(0.5))
            .alpha("L2", ScalarSchedule::constant(0.5))
            .beta("F", "L1", ScalarSchedule::constant(beta.0))
            .beta("F", "L2", ScalarSchedule::constant(beta.1))
            .build()
            .unwrap()
    }

    #[test]
    fn mixture_limit_midpoint() {
        let tr = run(&two_targets((0.2, 0.2)), 200, None).unwrap();
        let r = check_corollary_mixture(&tr, &opts()).unwrap();
        assert!(r.passed, "{:?}", r.worst());
        for i in [0, 1] {
            assert!((tr.last().opinion(i)[0] - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn mixture_single_group_collapses_to_target() {
        let tr = run(&demo(), 80, None).unwrap();
        let r = check_corollary_mixture(&tr, &opts()).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn mixture_undefined_for_zero_betas() {
        let tr = run(&two_targets((0.0, 0.0)), 10, None).unwrap();
        assert_eq!(check_corollary_mixture(&tr, &opts()), Err(CheckError::UndefinedLimit { agent: 0 }));
    }

    fn subsystems(eps: f64, far: f64) -> Scenario {
        Scenario::builder(1, eps)
            .leader_group("A", [0.0])
            .leader_group("B", [far])
            .follower_group("FA", Some("A"))
            .follower_group("FB", Some("B"))
            .agents("A", [[0.05], [-0.05]])
            .agents("FA", [[0.1], [-0.08]])
            .agents("B", [[far + 0.02]])
            .agents("FB", [[far - 0.1]])
            .alpha("A", ScalarSchedule::constant(0.6))
            .alpha("B", ScalarSchedule::constant(0.6))
            .beta("FA", "A", ScalarSchedule::constant(0.5))
            .beta("FB", "B", ScalarSchedule::constant(0.5))
            .build()
            .unwrap()
    }

    #[test]
    fn separated_subsystems_converge() {
        let tr = run(&subsystems(1.0, 10.0), 100, None).unwrap();
        let r = check_corollary_subsystems(&tr, &opts()).unwrap();
        assert!(r.passed, "{:?}", r.worst());
    }

    #[test]
    fn overlapping_subsystems_cross_talk() {
        let tr = run(&subsystems(5.0, 1.0), 10, None).unwrap();
        assert!(matches!(check_corollary_subsystems(&tr, &opts()), Err(CheckError::CrossTalk { t: 0, .. })));
    }

    #[test]
    fn single_subsystem_matches_consensus() {
        let s = Scenario::builder(1, 1.0)
            .leader_group("L1", [0.0])
            .follower_group("F", Some("L1"))
            .follower([0.3])
            .agent("L1", [0.1])
            .alpha("L1", ScalarSchedule::constant(0.5))
            .beta("F", "L1", ScalarSchedule::constant(0.5))
            .build()
            .unwrap();
        let tr = run(&s, 60, None).unwrap();
        let sub = check_corollary_subsystems(&tr, &opts()).unwrap();
        let direct = check_theorem_consensus(&tr, &opts()).unwrap();
        assert!(sub.passed && direct.passed);
        let sub_bounds: Vec<f64> = sub.records.iter().filter(|r| r.subject.contains("A_{t+1}")).map(|r| r.lhs).collect();
        let direct_bounds: Vec<f64> = direct.records.iter().filter(|r| r.subject.contains("A_{t+1}")).map(|r| r.lhs).collect();
        assert_eq!(sub_bounds, direct_bounds);
    }
}
