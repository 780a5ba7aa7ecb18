//! Grid and brute-force neighbor search give identical sets.

use std::time::Instant;

use lfmix::config::{Bound, Distribution, RandomInit};
use lfmix::neighborhood::SearchPath;
use lfmix::prelude::*;
use lfmix::scenario::random_initial_state;

fn main() {
    let n = 5_000;
    let init = RandomInit {
        distribution: Distribution::UniformBox,
        low: Bound::Scalar(0.0),
        high: Bound::Scalar(1.0),
        seed: 1,
    };
    let state = random_initial_state(&init, n, 2).unwrap();
    let scenario = Scenario::builder(2, 0.03)
        .agents("F", state.rows().map(<[f64]>::to_vec))
        .build()
        .unwrap();

    let start = Instant::now();
    let naive = neighbors_naive(&state, &scenario);
    let naive_time = start.elapsed();
    let start = Instant::now();
    let grid = neighbors_grid(&state, &scenario);
    let grid_time = start.elapsed();

    let SearchPath::Grid { candidates } = grid.path else {
        unreachable!("d = 2 is below the grid cap")
    };
    println!("agents: {n}, mean neighborhood: {:.1}", naive.total_entries() as f64 / n as f64);
    println!("naive: {naive_time:?}, grid: {grid_time:?} ({candidates} candidate pairs)");
    println!("identical: {}", grid.sets == naive);
}
