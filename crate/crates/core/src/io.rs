//! Run artifacts: trajectory and metrics CSV, run summary and check reports.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{measured_gamma, metrics_table, MetricsRow, TheoremReport};
use crate::dynamics::{StopReason, Trajectory};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CANONICAL_FILE: &str = "scenario.canonical.json";
pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn create(path: &Path) -> Result<File, IoError> {
    File::create(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.to_path_buf(), source }
}

/// Writes `t,agent,group,x0..x{d-1}` for every agent at every step with
/// `t % record_every == 0`.
pub fn write_trajectory_csv<W: Write>(out: W, trajectory: &Trajectory, record_every: u64) -> csv::Result<()> {
    let sc = trajectory.scenario();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "agent".into(), "group".into()];
    header.extend((0..sc.dimension()).map(|c| format!("x{c}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for state in trajectory.states().iter().filter(|s| s.t() % record_every.max(1) == 0) {
        for (i, x) in state.rows().enumerate() {
            row.clear();
            row.push(state.t().to_string());
            row.push(i.to_string());
            row.push(sc.group_label(i).to_string());
            row.extend(x.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row of the long-format metrics file.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRecord {
    pub t: u64,
    pub group: String,
    pub metric: String,
    pub value: f64,
}

/// Flattens metric rows into `(t, group, metric, value)` records. `C` is per
/// leader group, `A` and `max_one_minus_beta_sum` are under `F`, `diameter`
/// under `all`, `max_alpha` per leader group.
pub fn metric_records(trajectory: &Trajectory, rows: &[MetricsRow]) -> Vec<MetricRecord> {
    let sc = trajectory.scenario();
    let mut out = Vec::new();
    let mut push = |t, group: &str, metric: &str, value| {
        out.push(MetricRecord { t, group: group.into(), metric: metric.into(), value })
    };
    for r in rows {
        for (k, c) in r.leader_max_distance.iter().enumerate() {
            push(r.t, sc.leader_group_name(k), "C", *c);
        }
        if let Some(a) = r.follower_max_distance {
            push(r.t, "F", "A", a);
        }
        push(r.t, "all", "diameter", r.diameter);
        for (k, a) in r.degrees.max_alpha.iter().enumerate() {
            push(r.t, sc.leader_group_name(k), "max_alpha", *a);
        }
        if let Some(b) = r.degrees.max_one_minus_beta_sum {
            push(r.t, "F", "max_one_minus_beta_sum", b);
        }
    }
    out
}

pub fn write_metrics_csv<W: Write>(out: W, records: &[MetricRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "group", "metric", "value"])?;
    for r in records {
        w.write_record([r.t.to_string(), r.group.clone(), r.metric.clone(), r.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricRecord>, IoError> {
    let err = csv_err(path);
    let mut r = csv::Reader::from_path(path).map_err(&err)?;
    let header = r.headers().map_err(&err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "group", "metric", "value"] {
        return Err(IoError::Format {
            path: path.to_path_buf(),
            detail: "expected header t,group,metric,value".into(),
        });
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(&err)?;
        let bad = |what: &str| IoError::Format {
            path: path.to_path_buf(),
            detail: format!("row {}: bad {what}", line + 2),
        };
        out.push(MetricRecord {
            t: rec[0].parse().map_err(|_| bad("t"))?,
            group: rec[1].to_string(),
            metric: rec[2].to_string(),
            value: rec[3].parse().map_err(|_| bad("value"))?,
        });
    }
    Ok(out)
}

/// Summary written next to every run.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    #[serde(flatten)]
    pub stop: StopReason,
    pub steps: u64,
    pub agents: usize,
    pub wall_time_seconds: f64,
    pub threads: usize,
    pub record_every: u64,
    /// Sup over the run of the degree extremes `max(α, 1 − Σβ)`.
    pub measured_gamma: f64,
    /// Sup over the run of the leader degrees `α`, when there are leaders.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_delta: Option<f64>,
    pub final_max_target_distance: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
}

impl RunSummary {
    pub fn new(trajectory: &Trajectory, rows: &[MetricsRow], wall_time_seconds: f64, threads: usize, record_every: u64) -> Self {
        let sc = trajectory.scenario();
        let steps = trajectory.steps() as u64;
        let measured_delta = rows
            .iter()
            .take(trajectory.steps().max(1))
            .flat_map(|r| r.degrees.max_alpha.iter().copied())
            .reduce(f64::max);
        RunSummary {
            stop: trajectory.stop_reason(),
            steps,
            agents: sc.num_agents(),
            wall_time_seconds,
            threads,
            record_every,
            measured_gamma: measured_gamma(sc, 0, steps),
            measured_delta,
            final_max_target_distance: rows.last().map(|r| r.leader_max_distance.clone()).unwrap_or_default(),
            fault: None,
        }
    }
}

/// Writes the full artifact set of one run into `dir`.
pub fn write_run_dir(
    dir: &Path,
    trajectory: &Trajectory,
    record_every: u64,
    summary_of: impl FnOnce(&[MetricsRow]) -> RunSummary,
) -> Result<RunSummary, IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::File { path: dir.to_path_buf(), source })?;
    let tp = dir.join(TRAJECTORY_FILE);
    write_trajectory_csv(io::BufWriter::new(create(&tp)?), trajectory, record_every).map_err(csv_err(&tp))?;

    let rows = metrics_table(trajectory);
    let mp = dir.join(METRICS_FILE);
    write_metrics_csv(io::BufWriter::new(create(&mp)?), &metric_records(trajectory, &rows)).map_err(csv_err(&mp))?;

    write_text(&dir.join(CANONICAL_FILE), &trajectory.scenario().to_config().to_json()?)?;
    let summary = summary_of(&rows);
    write_text(&dir.join(RUN_FILE), &serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

/// Status of one check in the structured report.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckOutcome {
    Pass { report: TheoremReport },
    Fail { report: TheoremReport },
    /// Serialized as `"skipped"` with the reason; does not fail the run.
    Skipped { reason: String },
    /// The check could not be evaluated because the run violated one of its
    /// structural requirements (undefined limit, subsystem cross-talk).
    Error { error: String },
}

impl CheckOutcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, CheckOutcome::Fail { .. } | CheckOutcome::Error { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_slack: Option<f64>,
    #[serde(flatten)]
    pub outcome: CheckOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReportFile {
    pub passed: bool,
    pub steps: u64,
    #[serde(flatten)]
    pub stop: StopReason,
    pub checks: Vec<CheckEntry>,
}
