//! Followers under two leader groups settle at a weighted mix of targets.
//!
//! With targets 0 and 1 and equal attraction `β = (0.2, 0.2)`, every
//! follower's limit is `0.5`.

use lfmix::analysis::CheckOptions;
use lfmix::config::ScenarioConfig;
use lfmix::prelude::*;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/mixture.json");
    let scenario = build_scenario(&ScenarioConfig::load(path.as_ref()).unwrap()).unwrap();
    let trajectory = Simulator::new(scenario).run().unwrap();

    let sc = trajectory.scenario();
    for (i, x) in trajectory.last().rows().enumerate() {
        println!("agent {i} ({}) -> {:.9}", sc.group_label(i), x[0]);
    }
    let report = check_corollary_mixture(&trajectory, &CheckOptions::default()).unwrap();
    println!("mixture limit: passed={} gamma={:?}", report.passed, report.parameters.gamma);

    // without any leader attraction the limit is undefined
    let config = sc.to_config();
    let mut zero = config.clone();
    zero.schedules.retain(|r| r.leader_group.is_none());
    let trajectory = Simulator::new(build_scenario(&zero).unwrap()).run_with(5, None).unwrap();
    println!("zero attraction: {:?}", check_corollary_mixture(&trajectory, &CheckOptions::default()).unwrap_err());
}
