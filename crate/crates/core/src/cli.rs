//! Command-line surface: `simulate`, `check`, `plot` and `sweep`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 schedule violation at run
//! time, 4 a verification check failed. Diagnostics go to standard error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    check_ball_invariance, check_corollary_mixture, check_corollary_subsystems, check_lemma_contraction_trajectory,
    check_theorem_consensus, check_theorem_target, degree_extremes, reference_point, CheckError, CheckOptions,
    TheoremReport,
};
use crate::config::{InitialOpinions, ScenarioConfig};
use crate::dynamics::{with_threads, Fault, Simulator, Trajectory};
use crate::error::DynamicsError;
use crate::io::{self, CheckEntry, CheckOutcome, CheckReportFile, RunSummary};
use crate::plot::{render_svg, PlotOptions};
use crate::scenario::{build_scenario, Scenario};
use crate::sweep::{self, SweepOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SCHEDULE_VIOLATION: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lfmix", version, about = "Leader-follower bounded-confidence opinion dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write trajectory, metrics and run summary.
    Simulate(SimulateArgs),
    /// Run a scenario and verify the convergence results on the trajectory.
    Check(CheckArgs),
    /// Render a metrics CSV as an SVG line chart.
    Plot(PlotArgs),
    /// Run a Cartesian parameter sweep, one run directory per point.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultKind {
    /// Shift every neighbor mean by 5% of epsilon.
    MeanShift,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Override the scenario's horizon.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Record opinions every K steps (metrics are recorded every step).
    #[arg(long, value_name = "K")]
    pub record_every: Option<u64>,
    /// Worker threads; output is identical for any value.
    #[arg(long, env = "LFMIX_THREADS")]
    pub threads: Option<usize>,
    /// Override the seed of random initial opinions.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Corrupt the update rule to demonstrate that checks catch it.
    #[arg(long, value_enum)]
    pub inject_fault: Option<FaultKind>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckName {
    /// Per-step leader contraction.
    Lemma1,
    /// Leader groups reach their targets under a uniform degree bound.
    Thm2,
    /// Ball invariance around the single target.
    Lemma3,
    /// Consensus bound with a single leader group.
    Thm4,
    /// Mixture limit of followers under several leader groups.
    Cor1,
    /// Independent subsystems reach their own targets.
    Cor2,
}

impl CheckName {
    pub const ALL: [CheckName; 6] = [
        CheckName::Lemma1,
        CheckName::Thm2,
        CheckName::Lemma3,
        CheckName::Thm4,
        CheckName::Cor1,
        CheckName::Cor2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckName::Lemma1 => "lemma1",
            CheckName::Thm2 => "thm2",
            CheckName::Lemma3 => "lemma3",
            CheckName::Thm4 => "thm4",
            CheckName::Cor1 => "cor1",
            CheckName::Cor2 => "cor2",
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Checks to run, comma separated (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Vec<CheckName>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the run artifacts to this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Metrics CSV written by `simulate`.
    #[arg(long)]
    pub metrics: PathBuf,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics to draw, comma separated (e.g. C,A,diameter; default: all).
    #[arg(long, value_delimiter = ',')]
    pub series: Vec<String>,
    /// Linear instead of logarithmic y axis.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Axis `param=lo:hi:steps` with param one of epsilon, alpha, beta, n.
    /// Repeat for a Cartesian product.
    #[arg(long, required = true)]
    pub vary: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Check(a) => check(&a),
        Command::Plot(a) => plot(&a),
        Command::Sweep(a) => sweep_cmd(&a),
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

/// Reads the scenario and applies command-line overrides.
pub fn load_config(args: &RunArgs) -> Result<ScenarioConfig, String> {
    let mut cfg = ScenarioConfig::load(&args.scenario).map_err(|e| e.to_string())?;
    if let Some(h) = args.horizon {
        cfg.engine.horizon = h;
    }
    if let Some(k) = args.record_every {
        cfg.engine.record_every = k;
    }
    if let Some(seed) = args.seed {
        match &mut cfg.initial_opinions {
            InitialOpinions::Random(r) => r.seed = seed,
            InitialOpinions::Explicit(_) => eprintln!("warning: --seed ignored, initial opinions are explicit"),
        }
    }
    Ok(cfg)
}

fn load_scenario(args: &RunArgs) -> Result<Scenario, i32> {
    let cfg = load_config(args).map_err(|e| fail(EXIT_INVALID, e))?;
    build_scenario(&cfg).map_err(|errors| {
        eprintln!("error: invalid scenario {}", args.scenario.display());
        for e in errors.errors() {
            eprintln!("  - {e}");
        }
        EXIT_INVALID
    })
}

fn fault_of(kind: Option<FaultKind>) -> Option<Fault> {
    kind.map(|FaultKind::MeanShift| Fault::MEAN_SHIFT_DEFAULT)
}

/// A finished run with its timing.
pub struct TimedRun {
    pub trajectory: Trajectory,
    pub wall_time_seconds: f64,
    pub threads: usize,
}

/// Runs the scenario to its horizon on `threads` workers (the global pool
/// when `None`).
pub fn timed_run(scenario: Scenario, fault: Option<Fault>, threads: Option<usize>) -> Result<TimedRun, DynamicsError> {
    let go = || {
        let start = Instant::now();
        let trajectory = Simulator::new(scenario).with_fault(fault).run()?;
        Ok(TimedRun {
            trajectory,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        })
    };
    match threads {
        Some(n) => with_threads(n, go),
        None => go(),
    }
}

/// Writes the standard run artifacts for a finished run.
pub fn write_run(dir: &Path, run: &TimedRun, fault: Option<FaultKind>) -> Result<RunSummary, io::IoError> {
    let record_every = run.trajectory.scenario().engine().record_every;
    io::write_run_dir(dir, &run.trajectory, record_every, |rows| {
        let mut s = RunSummary::new(&run.trajectory, rows, run.wall_time_seconds, run.threads, record_every);
        s.fault = fault.map(|_| "mean-shift".to_string());
        s
    })
}

fn run_or_exit(scenario: Scenario, args: &RunArgs) -> Result<TimedRun, i32> {
    timed_run(scenario, fault_of(args.inject_fault), args.threads)
        .map_err(|e| fail(EXIT_SCHEDULE_VIOLATION, e))
}

pub fn simulate(args: &SimulateArgs) -> i32 {
    let scenario = match load_scenario(&args.run) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let run = match run_or_exit(scenario, &args.run) {
        Ok(r) => r,
        Err(code) => return code,
    };
    match write_run(&args.out, &run, args.run.inject_fault) {
        Ok(s) => {
            eprintln!("{}: {} steps, {}", args.out.display(), s.steps, s.stop.label());
            EXIT_OK
        }
        Err(e) => fail(EXIT_INVALID, e),
    }
}

fn sup_alpha(scenario: &Scenario, k: usize, steps: u64) -> f64 {
    (0..steps.max(1))
        .map(|s| degree_extremes(scenario, s).max_alpha[k])
        .fold(0.0, f64::max)
}

fn thm2(trajectory: &Trajectory, opts: &CheckOptions) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    let steps = trajectory.steps() as u64;
    let mut report = TheoremReport::new("thm2", opts.slack);
    let mut checked = 0;
    for k in 0..sc.num_leader_groups() {
        let name = sc.leader_group_name(k);
        let delta = sup_alpha(sc, k, steps);
        match check_theorem_target(trajectory, k, delta, opts.consensus_tol, opts) {
            Ok(r) => {
                report.note(format!("{name}: δ = {delta} measured over horizon"));
                report.absorb(&format!("{name}: "), r);
                checked += 1;
            }
            Err(CheckError::InapplicableHypothesis(why)) => report.note(format!("{name} skipped: {why}")),
            Err(e) => return Err(e),
        }
    }
    if checked == 0 {
        return Err(CheckError::InapplicableHypothesis("no leader group with sup α < 1".into()));
    }
    Ok(report)
}

fn lemma3(trajectory: &Trajectory, opts: &CheckOptions) -> Result<TheoremReport, CheckError> {
    let sc = trajectory.scenario();
    if sc.num_leader_groups() > 1 {
        return Err(CheckError::InapplicableHypothesis(format!(
            "{} leader groups; invariance needs at most one",
            sc.num_leader_groups()
        )));
    }
    let center = reference_point(sc);
    let extent = |s: &crate::model::SystemState| {
        s.rows()
            .map(|x| crate::model::squared_distance(x, &center))
            .fold(0.0, f64::max)
            .sqrt()
    };
    let radius = if sc.num_leader_groups() == 0 {
        extent(trajectory.initial())
    } else {
        trajectory
            .states()
            .iter()
            .map(extent)
            .find(|&r| r < sc.epsilon())
            .ok_or_else(|| CheckError::InapplicableHypothesis("opinions never within ε of the target".into()))?
    };
    check_ball_invariance(trajectory, &center, radius, opts)
}

/// Runs the selected checks on a trajectory.
pub fn run_checks(trajectory: &Trajectory, checks: &[CheckName], opts: &CheckOptions) -> Vec<CheckEntry> {
    checks
        .iter()
        .map(|c| {
            let result = match c {
                CheckName::Lemma1 => check_lemma_contraction_trajectory(trajectory, opts),
                CheckName::Thm2 => thm2(trajectory, opts),
                CheckName::Lemma3 => lemma3(trajectory, opts),
                CheckName::Thm4 => check_theorem_consensus(trajectory, opts),
                CheckName::Cor1 => check_corollary_mixture(trajectory, opts),
                CheckName::Cor2 => check_corollary_subsystems(trajectory, opts),
            };
            let (worst_slack, outcome) = match result {
                Ok(report) => (
                    report.worst_slack(),
                    if report.passed {
                        CheckOutcome::Pass { report }
                    } else {
                        CheckOutcome::Fail { report }
                    },
                ),
                Err(CheckError::InapplicableHypothesis(why)) => (
                    None,
                    CheckOutcome::Skipped {
                        reason: format!("skipped (hypothesis unmet): {why}"),
                    },
                ),
                Err(e) => (None, CheckOutcome::Error { error: e.to_string() }),
            };
            CheckEntry {
                check: c.name().to_string(),
                worst_slack,
                outcome,
            }
        })
        .collect()
}

pub fn check(args: &CheckArgs) -> i32 {
    let scenario = match load_scenario(&args.run) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let run = match run_or_exit(scenario, &args.run) {
        Ok(r) => r,
        Err(code) => return code,
    };
    if let Some(dir) = &args.out {
        if let Err(e) = write_run(dir, &run, args.run.inject_fault) {
            return fail(EXIT_INVALID, e);
        }
    }
    let checks = if args.checks.is_empty() { &CheckName::ALL[..] } else { &args.checks[..] };
    let opts = CheckOptions::default();
    let entries = match args.run.threads {
        Some(n) => with_threads(n, || run_checks(&run.trajectory, checks, &opts)),
        None => run_checks(&run.trajectory, checks, &opts),
    };
    let passed = !entries.iter().any(|e| e.outcome.is_failure());
    for e in &entries {
        let status = match &e.outcome {
            CheckOutcome::Pass { .. } => "pass".to_string(),
            CheckOutcome::Fail { .. } => "FAIL".to_string(),
            CheckOutcome::Skipped { reason } => reason.clone(),
            CheckOutcome::Error { error } => format!("FAIL: {error}"),
        };
        match e.worst_slack {
            Some(w) => eprintln!("{}: {status} (worst slack {w:e})", e.check),
            None => eprintln!("{}: {status}", e.check),
        }
    }
    let file = CheckReportFile {
        passed,
        steps: run.trajectory.steps() as u64,
        stop: run.trajectory.stop_reason(),
        checks: entries,
    };
    let json = match serde_json::to_string_pretty(&file) {
        Ok(j) => j,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    match &args.report {
        Some(p) => {
            if let Err(e) = io::write_text(p, &json) {
                return fail(EXIT_INVALID, e);
            }
        }
        None => println!("{json}"),
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

pub fn plot(args: &PlotArgs) -> i32 {
    let records = match io::read_metrics_csv(&args.metrics) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let opts = PlotOptions {
        series: args.series.clone(),
        log_scale: !args.linear,
        title: args.metrics.display().to_string(),
    };
    let svg = match render_svg(&records, &opts) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INVALID, format!("{}: {e}", args.metrics.display())),
    };
    match std::fs::write(&args.out, svg) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(EXIT_INVALID, format!("{}: {e}", args.out.display())),
    }
}

enum PointFailure {
    Dynamics(DynamicsError),
    Io(io::IoError),
}

pub fn sweep_cmd(args: &SweepArgs) -> i32 {
    let axes = match sweep::parse_axes(&args.vary) {
        Ok(a) => a,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let base = match load_config(&args.run) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let points = match sweep::plan(&base, &axes) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let fault = fault_of(args.run.inject_fault);
    let go = || {
        sweep::run_points(&points, &args.out, |p, dir| {
            let run = timed_run(p.scenario.clone(), fault, None).map_err(PointFailure::Dynamics)?;
            write_run(&dir, &run, args.run.inject_fault).map_err(PointFailure::Io)?;
            Ok(SweepOutcome::from_trajectory(p, &run.trajectory))
        })
    };
    let outcomes = match args.run.threads {
        Some(n) => with_threads(n, go),
        None => go(),
    };
    let outcomes = match outcomes {
        Ok(o) => o,
        Err(PointFailure::Dynamics(e)) => return fail(EXIT_SCHEDULE_VIOLATION, e),
        Err(PointFailure::Io(e)) => return fail(EXIT_INVALID, e),
    };
    let summary = args.out.join("summary.csv");
    if let Err(e) = sweep::write_summary(&summary, &axes, &outcomes) {
        return fail(EXIT_INVALID, format!("{}: {e}", summary.display()));
    }
    eprintln!("{} points written to {}", outcomes.len(), args.out.display());
    EXIT_OK
}
