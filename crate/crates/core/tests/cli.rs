mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::scenario_path;

fn lfmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfmix"))
        .args(args)
        .env_remove("LFMIX_THREADS")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_consensus_demo_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = lfmix(&["simulate", "--scenario", &scenario_path("consensus_demo.json"), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = read_json(&out.join("run.json"));
    assert_eq!(run["reason"], "converged");
    assert_eq!(run["measured_gamma"], 0.5);
    for f in ["trajectory.csv", "metrics.csv", "scenario.canonical.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn horizon_zero_writes_initial_rows_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = lfmix(&[
        "simulate",
        "--scenario",
        &scenario_path("mixture.json"),
        "--out",
        p(&out),
        "--horizon",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(out.join("trajectory.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|row| &row[0] == "0"));
}

#[test]
fn record_every_thins_trajectory_but_not_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = lfmix(&[
        "simulate",
        "--scenario",
        &scenario_path("mixture.json"),
        "--out",
        p(&out),
        "--horizon",
        "20",
        "--record-every",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let traj = csv::Reader::from_path(out.join("trajectory.csv")).unwrap().into_records().count();
    assert_eq!(traj, 5 * 10);
    let mut m = csv::Reader::from_path(out.join("metrics.csv")).unwrap();
    let steps: std::collections::BTreeSet<u64> = m.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(steps.len(), 21);
}

#[test]
fn missing_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = lfmix(&["simulate", "--scenario", "/no/such/file.json", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/file.json"));
}

#[test]
fn invalid_scenario_lists_every_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{
        "dimension": 1, "epsilon": 0.0,
        "groups": [
            {"name": "F", "kind": "follower", "members": 1},
            {"name": "L1", "kind": "leader", "target": [0.0], "members": 1},
            {"name": "L2", "kind": "leader", "target": [1.0], "members": 1}
        ],
        "initial_opinions": {"explicit": [[0.5], [0.0], [1.0]]},
        "schedules": [
            {"group": "F", "leader_group": "L1", "kind": "constant", "parameters": {"value": 0.6}},
            {"group": "F", "leader_group": "L2", "kind": "constant", "parameters": {"value": 0.6}}
        ]
    }"#,
    )
    .unwrap();
    let o = lfmix(&["simulate", "--scenario", p(&bad), "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("epsilon"), "{err}");
    assert!(err.contains("1.2"), "{err}");
}

#[test]
fn canonical_scenario_reproduces_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(lfmix(&["simulate", "--scenario", &scenario_path("subsystems.json"), "--out", p(&a)]).status.code(), Some(0));
    let canonical = a.join("scenario.canonical.json");
    assert_eq!(lfmix(&["simulate", "--scenario", p(&canonical), "--out", p(&b)]).status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.join("trajectory.csv")).unwrap(),
        std::fs::read(b.join("trajectory.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(&canonical).unwrap(),
        std::fs::read(b.join("scenario.canonical.json")).unwrap()
    );
}

#[test]
fn seed_flag_changes_random_opinions() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = lfmix(&[
            "simulate",
            "--scenario",
            &scenario_path("mixture.json"),
            "--out",
            p(&out),
            "--horizon",
            "0",
            "--seed",
            seed,
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out.join("trajectory.csv")).unwrap()
    };
    assert_eq!(run("a", "1"), run("b", "1"));
    assert_ne!(run("c", "1"), run("d", "2"));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_lfmix"))
        .args(["simulate", "--scenario", &scenario_path("consensus_demo.json"), "--out", p(&out)])
        .env("LFMIX_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&out.join("run.json"))["threads"], 3);
}

#[test]
fn check_consensus_demo_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = lfmix(&["check", "--scenario", &scenario_path("consensus_demo.json"), "--report", p(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&report);
    assert_eq!(r["passed"], true);
    let thm4 = r["checks"].as_array().unwrap().iter().find(|c| c["check"] == "thm4").unwrap();
    assert_eq!(thm4["status"], "pass");
    assert_eq!(thm4["report"]["parameters"]["gamma"], 0.5);
    assert!(thm4["worst_slack"].as_f64().unwrap() >= -1e-9);
    let cor2 = r["checks"].as_array().unwrap().iter().find(|c| c["check"] == "cor2").unwrap();
    assert_eq!(cor2["status"], "skipped");
}

#[test]
fn check_skips_consensus_without_attraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::fs::read_to_string(scenario_path("consensus_demo.json"))
        .unwrap()
        .replace(r#"{"group": "F", "leader_group": "L1", "kind": "constant", "parameters": {"value": 0.5}}"#, r#"{"group": "F", "leader_group": "L1", "kind": "constant", "parameters": {"value": 0.0}}"#);
    let path = dir.path().join("zero_beta.json");
    std::fs::write(&path, cfg).unwrap();
    let report = dir.path().join("report.json");
    let o = lfmix(&["check", "--scenario", p(&path), "--checks", "thm4", "--report", p(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&report);
    assert_eq!(r["checks"][0]["status"], "skipped");
    assert!(r["checks"][0]["reason"].as_str().unwrap().starts_with("skipped (hypothesis unmet)"));
}

#[test]
fn check_with_fault_exits_4() {
    let o = lfmix(&[
        "check",
        "--scenario",
        &scenario_path("consensus_demo.json"),
        "--checks",
        "lemma1",
        "--inject-fault",
        "mean-shift",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["checks"][0]["status"], "fail");
}

#[test]
fn check_rejects_unknown_check_name() {
    let o = lfmix(&["check", "--scenario", &scenario_path("consensus_demo.json"), "--checks", "thm9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_filters_series() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert_eq!(lfmix(&["simulate", "--scenario", &scenario_path("consensus_demo.json"), "--out", p(&run)]).status.code(), Some(0));
    let svg = dir.path().join("c.svg");
    let o = lfmix(&["plot", "--metrics", p(&run.join("metrics.csv")), "--out", p(&svg), "--series", "C"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains(r#"data-series="C:L1""#));
    assert!(!text.contains(r#"data-series="A:"#));
    assert!(!text.contains("diameter"));
}

#[test]
fn plot_rejects_empty_or_missing_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "t,group,metric,value\n").unwrap();
    let svg = dir.path().join("x.svg");
    assert_eq!(lfmix(&["plot", "--metrics", p(&empty), "--out", p(&svg)]).status.code(), Some(2));
    std::fs::write(&empty, "").unwrap();
    assert_eq!(lfmix(&["plot", "--metrics", p(&empty), "--out", p(&svg)]).status.code(), Some(2));
    assert_eq!(lfmix(&["plot", "--metrics", "/no/such.csv", "--out", p(&svg)]).status.code(), Some(2));
}

fn summary_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn sweep_alpha_steps_increase() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("leader.json");
    std::fs::write(
        &base,
        r#"{
        "dimension": 1, "epsilon": 1.0,
        "groups": [{"name": "L1", "kind": "leader", "target": [0.0], "members": 1}],
        "initial_opinions": {"explicit": [[0.8]]},
        "engine": {"horizon": 1000, "stop": {"tol": 1e-9, "window": 1}}
    }"#,
    )
    .unwrap();
    let out = dir.path().join("sweep");
    let o = lfmix(&["sweep", "--scenario", p(&base), "--vary", "alpha=0.1:0.9:3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = summary_rows(&out.join("summary.csv"));
    assert_eq!(rows.len(), 3);
    let steps: Vec<u64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(steps[0] < steps[1] && steps[1] < steps[2], "{steps:?}");
    assert!(out.join("point-0002/trajectory.csv").exists());
}

#[test]
fn one_point_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario_path("sweep_base.json");
    let sim = dir.path().join("sim");
    assert_eq!(lfmix(&["simulate", "--scenario", &scenario, "--out", p(&sim)]).status.code(), Some(0));
    let sweep = dir.path().join("sweep");
    let o = lfmix(&["sweep", "--scenario", &scenario, "--vary", "epsilon=1:1:1", "--out", p(&sweep)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["trajectory.csv", "metrics.csv", "scenario.canonical.json"] {
        assert_eq!(
            std::fs::read(sim.join(f)).unwrap(),
            std::fs::read(sweep.join("point-0000").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sweep_with_tiny_epsilon_isolates_agents() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = lfmix(&[
        "sweep",
        "--scenario",
        &scenario_path("subsystems.json"),
        "--vary",
        "epsilon=0.001:0.001:1",
        "--horizon",
        "1",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(out.join("point-0000/trajectory.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let initial: Vec<&csv::StringRecord> = rows.iter().filter(|r| &r[0] == "0").collect();
    let last: Vec<&csv::StringRecord> = rows.iter().filter(|r| &r[0] == "1").collect();
    for (a, b) in initial.iter().zip(&last) {
        if a[2].starts_with('F') {
            assert_eq!(a[3], b[3], "follower {} moved", &a[1]);
        }
    }
}

#[test]
fn sweep_rejects_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    for axis in ["alpha", "gamma=0:1:2", "alpha=0:1:0", "alpha=0:2:3"] {
        let o = lfmix(&[
            "sweep",
            "--scenario",
            &scenario_path("sweep_base.json"),
            "--vary",
            axis,
            "--out",
            p(dir.path()),
        ]);
        assert_eq!(o.status.code(), Some(2), "{axis}");
    }
}

#[test]
fn help_lists_flags() {
    let o = lfmix(&["simulate", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--scenario", "--out", "--horizon", "--record-every", "--threads", "--seed", "--inject-fault", "LFMIX_THREADS"] {
        assert!(text.contains(flag), "{flag}");
    }
}
