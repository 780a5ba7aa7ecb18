//! Steps to convergence as the leader degree grows.

use lfmix::config::ScenarioConfig;
use lfmix::prelude::*;
use lfmix::sweep::{parse_axes, plan, SweepOutcome};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/sweep_base.json");
    let base = ScenarioConfig::load(path.as_ref()).unwrap();
    let axes = parse_axes(&["alpha=0.1:0.9:5", "epsilon=0.5:1.0:2"]).unwrap();
    println!("{:>6} {:>8} {:>12} {:>10}", "alpha", "epsilon", "converged at", "final dist");
    for point in plan(&base, &axes).unwrap() {
        let trajectory = Simulator::new(point.scenario.clone()).run().unwrap();
        let outcome = SweepOutcome::from_trajectory(&point, &trajectory);
        println!(
            "{:>6.2} {:>8.2} {:>12} {:>10.2e}",
            point.values[0].1,
            point.values[1].1,
            outcome.steps_to_convergence().map_or("-".into(), |s| s.to_string()),
            outcome.final_max_distance
        );
    }
}
