//! Simulation engine and verification harness for mixed leader-follower
//! bounded-confidence opinion dynamics.
//!
//! Agents hold opinions in `R^d` and are split into one follower group `F`
//! and `m` leader groups `L_1..L_m`, each leader group with a fixed target
//! `g_k`. Two agents interact when their opinions are within `ε` of each
//! other. Leaders average their own group's neighbors and mix in their
//! target; followers average follower neighbors and mix in the mean of each
//! leader group they can see. The [`analysis`] module checks the model's
//! contraction, invariance and convergence bounds on every trajectory.
//!
//! ```
//! use lfmix::prelude::*;
//!
//! let scenario = Scenario::builder(1, 1.0)
//!     .leader_group("L1", [0.0])
//!     .follower([0.3])
//!     .agent("L1", [0.1])
//!     .alpha("L1", ScalarSchedule::constant(0.5))
//!     .beta("F", "L1", ScalarSchedule::constant(0.5))
//!     .build()
//!     .unwrap();
//! let trajectory = Simulator::new(scenario).run_with(60, None).unwrap();
//! assert!(trajectory.last().opinion(0)[0].abs() < 1e-6);
//! ```

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod neighborhood;
pub mod plot;
pub mod scenario;
pub mod schedule;
pub mod sweep;
pub mod tolerances;

pub mod prelude {
    pub use crate::analysis::{
        check_ball_invariance, check_corollary_mixture, check_corollary_subsystems,
        check_lemma_contraction, check_theorem_consensus, check_theorem_target, detect_convergence,
        max_target_distance, CheckError, TheoremReport,
    };
    pub use crate::config::{EngineOptions, ScenarioConfig, StopCriterion};
    pub use crate::dynamics::{Fault, Simulator, StopReason, Trajectory};
    pub use crate::error::{DynamicsError, ScenarioError, ValidationErrors};
    pub use crate::model::{distance, AgentId, GroupId, OpinionVec, SystemState};
    pub use crate::neighborhood::{neighbors_grid, neighbors_naive, NeighborSets, NeighborStrategy};
    pub use crate::scenario::{build_scenario, Scenario};
    pub use crate::schedule::ScalarSchedule;
}
