//! Writes a run's artifacts and renders its distance decay as SVG.
//!
//! Output goes to `target/lfmix-plot-example/`.

use std::path::Path;

use lfmix::io::{read_metrics_csv, write_run_dir, RunSummary, METRICS_FILE};
use lfmix::plot::{render_svg, PlotOptions};
use lfmix::prelude::*;

fn main() {
    let scenario = Scenario::builder(2, 1.0)
        .leader_group("L1", [0.0, 0.0])
        .agents("L1", [[0.4, 0.1], [0.2, -0.3]])
        .agents("F", [[0.5, 0.5], [-0.3, 0.4], [0.1, -0.6]])
        .alpha("L1", ScalarSchedule::constant(0.7))
        .beta("F", "L1", ScalarSchedule::constant(0.4))
        .build()
        .unwrap();
    let trajectory = Simulator::new(scenario).run_with(80, None).unwrap();

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/lfmix-plot-example");
    let summary = write_run_dir(&dir, &trajectory, 1, |rows| RunSummary::new(&trajectory, rows, 0.0, 1, 1)).unwrap();
    println!("run: {} steps, gamma = {}", summary.steps, summary.measured_gamma);

    let records = read_metrics_csv(&dir.join(METRICS_FILE)).unwrap();
    let opts = PlotOptions {
        series: vec!["C".into(), "A".into(), "diameter".into()],
        ..PlotOptions::default()
    };
    let svg = render_svg(&records, &opts).unwrap();
    let out = dir.join("decay.svg");
    std::fs::write(&out, svg).unwrap();
    println!("wrote {}", out.display());
}
