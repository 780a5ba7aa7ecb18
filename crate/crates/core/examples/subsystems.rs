//! Two leader groups far apart, each with its own followers.
//!
//! The joint run never puts a follower within ε of the other subsystem, so
//! each subsystem behaves as if simulated alone. Widening ε past the gap
//! between the targets triggers cross-talk detection.

use lfmix::analysis::CheckOptions;
use lfmix::config::ScenarioConfig;
use lfmix::prelude::*;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/subsystems.json");
    let config = ScenarioConfig::load(path.as_ref()).unwrap();
    let trajectory = Simulator::new(build_scenario(&config).unwrap()).run().unwrap();
    let report = check_corollary_subsystems(&trajectory, &CheckOptions::default()).unwrap();
    println!("separated: passed={} records={}", report.passed, report.records.len());
    for r in report.records.iter().filter(|r| r.subject.contains("joint")) {
        println!("  {}: {:.3e}", r.subject, r.lhs);
    }

    let mut close = config;
    close.epsilon = 12.0;
    let trajectory = Simulator::new(build_scenario(&close).unwrap()).run().unwrap();
    match check_corollary_subsystems(&trajectory, &CheckOptions::default()) {
        Err(e) => println!("overlapping: {e}"),
        Ok(r) => println!("overlapping: unexpectedly independent, passed={}", r.passed),
    }
}
