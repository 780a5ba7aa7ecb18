//! A leader group converging to its target.
//!
//! Every leader has `α = 0.9` except agent 0, whose degree decays as
//! `0.5^t`. The group radius stays under the `0.9^t` envelope, and agent 0
//! reaches the target long before the rest of the group.

use lfmix::analysis::{check_theorem_target_agent, CheckOptions};
use lfmix::config::ScenarioConfig;
use lfmix::prelude::*;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/leader_target.json");
    let config = ScenarioConfig::load(path.as_ref()).expect("scenario file");
    let scenario = build_scenario(&config).expect("valid scenario");
    let trajectory = Simulator::new(scenario).run().expect("run");

    let opts = CheckOptions::default();
    // agent 0 starts at α = 1, so the uniform 0.9 bound does not apply
    println!("uniform envelope: {}", check_theorem_target(&trajectory, 0, 0.9, 1e-9, &opts).unwrap_err());

    let mut uniform = config.clone();
    uniform.schedules.retain(|r| r.agent.is_none());
    let plain = Simulator::new(build_scenario(&uniform).unwrap()).run().unwrap();
    let r = check_theorem_target(&plain, 0, 0.9, 1e-9, &opts).unwrap();
    println!("uniform envelope without the decaying leader: passed={}", r.passed);
    let agent = check_theorem_target_agent(&trajectory, 0, &opts).expect("agent 0 is a leader");
    println!("decaying leader: passed={} worst slack={:e}", agent.passed, agent.worst_slack().unwrap());

    let sc = trajectory.scenario();
    for t in [0usize, 20, 60, 120, trajectory.steps()] {
        let s = trajectory.state(t);
        let g = sc.target(0).coords();
        let d0 = s.opinion(0).iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        println!("t={t:>3}  C_t={:.3e}  agent 0 distance={d0:.3e}", max_target_distance(s, sc, 0));
    }
}
