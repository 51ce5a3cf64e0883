//! Runs a small alpha sweep through the harness and prints the aggregate table.
//! Sizes and epochs are cut down so the grid finishes in about a minute.
//!
//! `cargo run --release --example experiment_grid -- [out_dir]`

use htce::harness::{emit_report, run_experiment_with, CellOutcome, ExperimentSpec, Method, ReportFormat, Sweep, SweepValue};
use htce::learners::LearnerKind;

fn main() -> htce::Result<()> {
    let mut spec = ExperimentSpec::new(Sweep::AlphaSweep);
    spec.learners = vec![LearnerKind::T, LearnerKind::Tarnet];
    spec.methods = vec![Method::TargetOnly, Method::Htce];
    spec.values = vec![SweepValue::Scalar(0.2), SweepValue::Scalar(0.8)];
    spec.seeds = vec![0, 1];
    spec.sim.n_source = 600;
    spec.sim.n_target = 150;
    spec.train.max_epochs = 40;

    let report = run_experiment_with(&spec, &|o| {
        if let CellOutcome::Failed(f) = o {
            eprintln!("cell failed: {}", f.error);
        }
    })?;
    print!("{}", report.table());

    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        for f in emit_report(&report, ReportFormat::Csv, std::path::Path::new(&dir).join("records.csv"))? {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}
