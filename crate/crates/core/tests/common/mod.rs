#![allow(dead_code)]

use lfmix::prelude::*;
use lfmix::scenario::ScenarioBuilder;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small deterministic generator for randomized test scenarios.
pub struct Gen(ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.0.next_u64() & 1 == 1
    }

    pub fn seed(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn point(&mut self, d: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..d).map(|_| self.range(lo, hi)).collect()
    }

    /// A point in the closed ball `B(center, radius)`.
    pub fn in_ball(&mut self, center: &[f64], radius: f64) -> Vec<f64> {
        let dir = self.point(center.len(), -1.0, 1.0);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        let r = radius * self.unit();
        center.iter().zip(&dir).map(|(c, v)| c + v / norm * r).collect()
    }

    /// Constant or seeded-random schedule with values in `[lo, hi]`.
    pub fn schedule(&mut self, lo: f64, hi: f64) -> ScalarSchedule {
        let a = self.range(lo, hi);
        if self.coin() {
            ScalarSchedule::constant(a)
        } else {
            let b = self.range(lo, hi);
            ScalarSchedule::seeded_random(self.seed(), a.min(b), a.max(b))
        }
    }

    /// Per-group β schedules whose suprema sum to at most 1.
    pub fn betas(&mut self, m: usize) -> Vec<ScalarSchedule> {
        let total = self.unit();
        let weights: Vec<f64> = (0..m).map(|_| self.unit() + 1e-3).collect();
        let sum: f64 = weights.iter().sum();
        weights.iter().map(|w| self.schedule(0.0, total * w / sum)).collect()
    }
}

/// Random mixed scenario: `1..=max_n` agents in dimension `1..=max_d` with
/// `1..=max_m` leader groups; every leader group is non-empty.
pub fn random_mixed(g: &mut Gen, max_n: usize, max_d: usize, max_m: usize) -> Scenario {
    let d = g.int(1, max_d);
    let m = g.int(1, max_m);
    let n = g.int(m, max_n.max(m));
    let eps = g.range(0.2, 1.5);
    let mut b = ScenarioBuilder::new(d, eps);
    for k in 0..m {
        b = b.leader_group(&format!("L{}", k + 1), g.point(d, -1.0, 1.0));
    }
    let mut roles = Vec::with_capacity(n);
    for i in 0..n {
        let group = if i < m { Some(i) } else if g.coin() { Some(g.int(0, m - 1)) } else { None };
        let name = group.map_or("F".to_string(), |k| format!("L{}", k + 1));
        b = b.agent(&name, g.point(d, -1.0, 1.0));
        roles.push(group);
    }
    for (i, role) in roles.iter().enumerate() {
        match role {
            Some(_) => b = b.agent_alpha(i, g.schedule(0.0, 1.0)),
            None => {
                for (k, s) in g.betas(m).into_iter().enumerate() {
                    b = b.agent_beta(i, &format!("L{}", k + 1), s);
                }
            }
        }
    }
    b.build().expect("generated scenario is valid")
}

/// Followers only, random opinions in the unit box.
pub fn random_followers(g: &mut Gen, n: usize, d: usize, eps: f64) -> Scenario {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| g.point(d, 0.0, 1.0)).collect();
    Scenario::builder(d, eps).agents("F", rows).build().expect("valid")
}

/// The consensus demo: one follower at 0.3, one leader at 0.1, target 0.
pub fn consensus_demo() -> Scenario {
    Scenario::builder(1, 1.0)
        .leader_group("L1", [0.0])
        .follower([0.3])
        .agent("L1", [0.1])
        .alpha("L1", ScalarSchedule::constant(0.5))
        .beta("F", "L1", ScalarSchedule::constant(0.5))
        .build()
        .unwrap()
}

pub fn scenario_path(name: &str) -> String {
    format!("{}/examples/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Plain bounded-confidence step written independently of the engine:
/// every agent moves to the mean of all agents within `eps`, summed in
/// ascending id.
pub fn hk_reference_step(rows: &[Vec<f64>], eps: f64) -> Vec<Vec<f64>> {
    let eps2 = eps * eps;
    rows.iter()
        .map(|xi| {
            let mut acc = vec![0.0; xi.len()];
            let mut count = 0usize;
            for xj in rows {
                let mut d2 = 0.0;
                for (a, b) in xi.iter().zip(xj) {
                    let diff = a - b;
                    d2 += diff * diff;
                }
                if d2 <= eps2 {
                    count += 1;
                    for (s, v) in acc.iter_mut().zip(xj) {
                        *s += v;
                    }
                }
            }
            acc.iter().map(|s| s / count as f64).collect()
        })
        .collect()
}
