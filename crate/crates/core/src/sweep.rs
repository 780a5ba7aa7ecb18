//! Cartesian parameter sweeps over a base scenario.
//!
//! An axis is written `param=lo:hi:steps` and takes `steps` evenly spaced
//! values from `lo` to `hi` inclusive. Parameters:
//!
//! - `epsilon`: confidence radius
//! - `alpha`: constant `α` for every leader group
//! - `beta`: constant `β^k` for every follower group and leader group
//! - `n`: size of the first follower group, which must be declared by count
//!   and the initial opinions must be random
//!
//! Point `i` draws random initial opinions with seed
//! `base ^ (i · 0x9E3779B97F4A7C15)`, so point 0 reuses the base seed.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{GroupKind, InitialOpinions, Members, ScenarioConfig, ScheduleRule};
use crate::dynamics::{StopReason, Trajectory};
use crate::error::ValidationErrors;
use crate::scenario::{build_scenario, Scenario};
use crate::schedule::ScalarSchedule;

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Epsilon,
    Alpha,
    Beta,
    N,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Epsilon => "epsilon",
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
            SweepParam::N => "n",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("bad sweep axis {0:?}: expected param=lo:hi:steps")]
    Syntax(String),
    #[error("unknown sweep parameter {0:?}; expected epsilon, alpha, beta or n")]
    UnknownParam(String),
    #[error("sweep axis {0}: {1}")]
    Range(String, String),
    #[error("parameter {0} given twice")]
    Duplicate(&'static str),
    #[error("cannot vary n: {0}")]
    CannotVaryN(String),
    #[error("sweep point {index}: {errors}")]
    InvalidPoint { index: usize, errors: ValidationErrors },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for SweepAxis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        let syntax = || SweepError::Syntax(s.to_string());
        let (name, range) = s.split_once('=').ok_or_else(syntax)?;
        let param = match name.trim() {
            "epsilon" | "eps" => SweepParam::Epsilon,
            "alpha" => SweepParam::Alpha,
            "beta" => SweepParam::Beta,
            "n" | "N" => SweepParam::N,
            other => return Err(SweepError::UnknownParam(other.to_string())),
        };
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(syntax());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| syntax())?;
        let hi: f64 = hi.trim().parse().map_err(|_| syntax())?;
        let steps: usize = steps.trim().parse().map_err(|_| syntax())?;
        let range_err = |m: &str| SweepError::Range(s.to_string(), m.to_string());
        if steps == 0 {
            return Err(range_err("steps must be at least 1"));
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(range_err("bounds must be finite"));
        }
        let values: Vec<f64> = if steps == 1 {
            vec![lo]
        } else {
            (0..steps)
                .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                .collect()
        };
        if param == SweepParam::N && values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(range_err("n values must be positive integers"));
        }
        Ok(SweepAxis { param, values })
    }
}

/// Seed for point `index`.
pub fn point_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64).wrapping_mul(SEED_STRIDE)
}

/// Every combination of axis values, first axis varying slowest.
pub fn grid(axes: &[SweepAxis]) -> Vec<Vec<(SweepParam, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.param, v));
                    q
                })
            })
            .collect();
    }
    points
}

/// The base config with one point's parameter values and seed applied.
pub fn apply_point(
    base: &ScenarioConfig,
    point: &[(SweepParam, f64)],
    index: usize,
) -> Result<ScenarioConfig, SweepError> {
    let mut cfg = base.clone();
    if let InitialOpinions::Random(r) = &mut cfg.initial_opinions {
        r.seed = point_seed(r.seed, index);
    }
    let leaders: Vec<String> = cfg
        .groups
        .iter()
        .filter(|g| g.kind == GroupKind::Leader)
        .map(|g| g.name.clone())
        .collect();
    let followers: Vec<String> = cfg
        .groups
        .iter()
        .filter(|g| g.kind == GroupKind::Follower)
        .map(|g| g.name.clone())
        .collect();
    for &(param, v) in point {
        match param {
            SweepParam::Epsilon => cfg.epsilon = v,
            SweepParam::Alpha => {
                for l in &leaders {
                    cfg.schedules.push(ScheduleRule {
                        group: Some(l.clone()),
                        agent: None,
                        leader_group: None,
                        schedule: ScalarSchedule::constant(v),
                    });
                }
            }
            SweepParam::Beta => {
                for f in &followers {
                    for l in &leaders {
                        cfg.schedules.push(ScheduleRule {
                            group: Some(f.clone()),
                            agent: None,
                            leader_group: Some(l.clone()),
                            schedule: ScalarSchedule::constant(v),
                        });
                    }
                }
            }
            SweepParam::N => {
                if !matches!(cfg.initial_opinions, InitialOpinions::Random(_)) {
                    return Err(SweepError::CannotVaryN("initial opinions are explicit".into()));
                }
                let g = cfg
                    .groups
                    .iter_mut()
                    .find(|g| g.kind == GroupKind::Follower)
                    .ok_or_else(|| SweepError::CannotVaryN("no follower group".into()))?;
                if !matches!(g.members, Members::Count(_)) {
                    return Err(SweepError::CannotVaryN(format!("group {} lists explicit ids", g.name)));
                }
                g.members = Members::Count(v as usize);
            }
        }
    }
    Ok(cfg)
}

/// Parses axes, rejecting a parameter that appears twice.
pub fn parse_axes<S: AsRef<str>>(specs: &[S]) -> Result<Vec<SweepAxis>, SweepError> {
    let mut axes: Vec<SweepAxis> = Vec::new();
    for s in specs {
        let a: SweepAxis = s.as_ref().parse()?;
        if axes.iter().any(|b| b.param == a.param) {
            return Err(SweepError::Duplicate(a.param.name()));
        }
        axes.push(a);
    }
    Ok(axes)
}

/// One validated sweep point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub index: usize,
    pub values: Vec<(SweepParam, f64)>,
    pub scenario: Scenario,
}

impl SweepPoint {
    pub fn dir_name(&self) -> String {
        format!("point-{:04}", self.index)
    }
}

/// Builds every point, failing on the first invalid one.
pub fn plan(base: &ScenarioConfig, axes: &[SweepAxis]) -> Result<Vec<SweepPoint>, SweepError> {
    grid(axes)
        .into_iter()
        .enumerate()
        .map(|(index, values)| {
            let cfg = apply_point(base, &values, index)?;
            let scenario = build_scenario(&cfg).map_err(|errors| SweepError::InvalidPoint { index, errors })?;
            Ok(SweepPoint { index, values, scenario })
        })
        .collect()
}

/// One line of `summary.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub index: usize,
    pub values: Vec<(SweepParam, f64)>,
    pub stop: StopReason,
    pub steps: u64,
    /// Largest distance of any agent to the reference point (the first
    /// target, or the initial centroid without leaders) at the final step.
    pub final_max_distance: f64,
}

impl SweepOutcome {
    pub fn from_trajectory(point: &SweepPoint, trajectory: &Trajectory) -> Self {
        let reference = crate::analysis::reference_point(trajectory.scenario());
        let final_max_distance = trajectory
            .last()
            .rows()
            .map(|x| crate::model::squared_distance(x, &reference))
            .fold(0.0, f64::max)
            .sqrt();
        SweepOutcome {
            index: point.index,
            values: point.values.clone(),
            stop: trajectory.stop_reason(),
            steps: trajectory.steps() as u64,
            final_max_distance,
        }
    }

    pub fn steps_to_convergence(&self) -> Option<u64> {
        match self.stop {
            StopReason::Converged { at } => Some(at),
            _ => None,
        }
    }
}

pub fn write_summary(path: &Path, axes: &[SweepAxis], outcomes: &[SweepOutcome]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["point".to_string(), "dir".to_string()];
    header.extend(axes.iter().map(|a| a.param.name().to_string()));
    header.extend(
        ["stop_reason", "converged", "steps", "steps_to_convergence", "final_max_distance"].map(String::from),
    );
    w.write_record(&header)?;
    for o in outcomes {
        let mut row = vec![o.index.to_string(), format!("point-{:04}", o.index)];
        row.extend(o.values.iter().map(|(_, v)| v.to_string()));
        row.push(o.stop.label().to_string());
        row.push(matches!(o.stop, StopReason::Converged { .. }).to_string());
        row.push(o.steps.to_string());
        row.push(o.steps_to_convergence().map(|s| s.to_string()).unwrap_or_default());
        row.push(o.final_max_distance.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `f` on every point in parallel and returns results in point order.
pub fn run_points<T: Send, E: Send>(
    points: &[SweepPoint],
    out: &Path,
    f: impl Fn(&SweepPoint, PathBuf) -> Result<T, E> + Sync,
) -> Result<Vec<T>, E> {
    points.par_iter().map(|p| f(p, out.join(p.dir_name()))).collect()
}
