//! One follower and one leader on the line, both pulled to the target 0.
//!
//! The leader halves its distance every step; the follower mixes its own
//! opinion with the leader's. The consensus check then reports the measured
//! contraction factor and the worst slack of the explicit bound.

use lfmix::analysis::CheckOptions;
use lfmix::prelude::*;

fn main() {
    let scenario = Scenario::builder(1, 1.0)
        .leader_group("L1", [0.0])
        .follower([0.3])
        .agent("L1", [0.1])
        .alpha("L1", ScalarSchedule::constant(0.5))
        .beta("F", "L1", ScalarSchedule::constant(0.5))
        .build()
        .expect("valid scenario");

    let trajectory = Simulator::new(scenario).run_with(60, None).expect("run");
    for state in trajectory.states().iter().step_by(10) {
        println!(
            "t={:>3}  follower={:+.3e}  leader={:+.3e}",
            state.t(),
            state.opinion(0)[0],
            state.opinion(1)[0]
        );
    }

    let report = check_theorem_consensus(&trajectory, &CheckOptions::default()).expect("hypothesis holds");
    println!(
        "consensus bound: passed={} gamma={:?} onset={:?} worst slack={:e}",
        report.passed,
        report.parameters.gamma,
        report.parameters.onset,
        report.worst_slack().unwrap_or(0.0)
    );
}
