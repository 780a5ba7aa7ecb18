//! The checks are not vacuous: a corrupted update rule fails them.
//!
//! The fault shifts every neighbor mean by 5% of ε. The leader then settles
//! away from its target, which breaks both the contraction inequality and
//! the consensus bound.

use lfmix::analysis::{check_lemma_contraction_trajectory, CheckOptions};
use lfmix::config::ScenarioConfig;
use lfmix::prelude::*;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/consensus_demo.json");
    let scenario = build_scenario(&ScenarioConfig::load(path.as_ref()).unwrap()).unwrap();
    let opts = CheckOptions::default();
    for fault in [None, Some(Fault::MEAN_SHIFT_DEFAULT)] {
        let trajectory = Simulator::new(scenario.clone()).with_fault(fault).run_with(60, None).unwrap();
        let lemma = check_lemma_contraction_trajectory(&trajectory, &opts).unwrap();
        let consensus = check_theorem_consensus(&trajectory, &opts).unwrap();
        println!(
            "fault={:<40} contraction passed={:<5} (worst {:+.2e})  consensus passed={:<5} (worst {:+.2e})",
            format!("{fault:?}"),
            lemma.passed,
            lemma.worst_slack().unwrap(),
            consensus.passed,
            consensus.worst_slack().unwrap()
        );
    }
}
