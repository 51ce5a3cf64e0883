//! Experiment grids, report files and the `htce-bench` binary on tiny problems.

use std::path::Path;
use std::process::Command;

use htce::harness::{
    cells, data_seed, generate_data, model_seed, read_aggregates_csv, read_records_csv, run_experiment, EvalReport,
    ExperimentSpec, Method, Sweep, SweepValue,
};
use htce::learners::{LearnerKind, ModelManifest};
use htce::simbench::{FeaturePartition, SimConfig};

fn tiny_spec(sweep: Sweep) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(sweep);
    s.learners = vec![LearnerKind::T];
    s.methods = vec![Method::TargetOnly];
    s.seeds = vec![3];
    s.sim.n_source = 120;
    s.sim.n_target = 80;
    s.train.max_epochs = 2;
    s
}

fn strip_clock(report: &EvalReport) -> EvalReport {
    let mut r = report.clone();
    for rec in &mut r.records {
        rec.wallclock_s = 0.0;
    }
    r
}

#[test]
fn single_cell_grid_yields_one_record() {
    let spec = tiny_spec(Sweep::Benchmark);
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.records.len(), 1);
    assert!(report.failures.is_empty());
    let r = &report.records[0];
    assert_eq!((r.learner, r.method, r.seed), (LearnerKind::T, Method::TargetOnly, 3));
    assert!(r.pehe.is_finite() && r.pehe > 0.0);
    assert_eq!(report.aggregates.len(), 1);
    assert_eq!(report.aggregates[0].std_error, 0.0);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let files = htce::harness::emit_report(&report, htce::harness::ReportFormat::Csv, &path).unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
    assert_eq!(read_records_csv(&path).unwrap(), report.records);
    assert_eq!(read_aggregates_csv(dir.path().join("r_aggregate.csv")).unwrap(), report.aggregates);
}

#[test]
fn grids_are_reproducible_and_seeded_from_the_spec() {
    let mut spec = tiny_spec(Sweep::AlphaSweep);
    spec.values = vec![SweepValue::Scalar(0.2), SweepValue::Scalar(0.9)];
    spec.seeds = vec![1, 7];
    spec.sim.n_target = 200;
    spec.methods = vec![Method::TargetOnly, Method::Htce];
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(strip_clock(&a), strip_clock(&b));
    assert!(a.failures.is_empty(), "{:?}", a.failures);
    assert_eq!(a.records.len(), cells(&spec).len());
    for (rec, cell) in a.records.iter().zip(cells(&spec)) {
        assert!(spec.seeds.contains(&rec.seed));
        assert_eq!((rec.seed, rec.learner, rec.method), (cell.seed, cell.learner, cell.method));
        assert_eq!(rec.sweep_value, cell.label());
    }
    assert_eq!(a.aggregates.len(), 4);
    assert!(a.aggregates.iter().all(|g| g.n_seeds == 2));
    assert!(a.find("0.2", LearnerKind::T, Method::Htce).is_some());
}

#[test]
fn seeds_separate_data_from_models() {
    let spec = tiny_spec(Sweep::AlphaSweep);
    let lo = generate_data(&spec, Some(SweepValue::Scalar(0.1)), 4).unwrap();
    let hi = generate_data(&spec, Some(SweepValue::Scalar(0.9)), 4).unwrap();
    // Sweep points share covariates and treatment-free structure, only outcomes move.
    assert_eq!(lo.target.train.x, hi.target.train.x);
    assert_ne!(lo.target.train.tau, hi.target.train.tau);
    assert_ne!(data_seed(4), data_seed(5));
    let cs = cells(&{
        let mut s = spec.clone();
        s.values = vec![SweepValue::Scalar(0.1)];
        s.methods = vec![Method::TargetOnly, Method::Htce];
        s
    });
    assert_ne!(model_seed(&cs[0]), model_seed(&cs[1]));
}

#[test]
fn failing_cells_are_reported_not_fatal() {
    let mut spec = tiny_spec(Sweep::AlphaSweep);
    // With this seed the small target training split holds treated units only; the
    // source still covers both arms.
    spec.values = vec![SweepValue::Scalar(0.9)];
    spec.seeds = vec![1];
    spec.methods = vec![Method::TargetOnly, Method::Htce];
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.failures.len(), 1, "{:?}", report.failures);
    assert_eq!(report.failures[0].method, Method::TargetOnly);
    assert!(report.failures[0].error.contains("arm"), "{}", report.failures[0].error);
    assert_eq!(report.records.len(), 1);
    assert_eq!(report.records[0].method, Method::Htce);

    let dir = tempfile::tempdir().unwrap();
    let files = htce::harness::emit_report(&report, htce::harness::ReportFormat::Csv, dir.path().join("r.csv")).unwrap();
    assert_eq!(files.len(), 3);
    assert!(dir.path().join("r_failures.csv").exists());
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = tiny_spec(Sweep::Benchmark);
    s.values = vec![SweepValue::Scalar(1.0)];
    assert!(run_experiment(&s).is_err());
    let mut s = tiny_spec(Sweep::Benchmark);
    s.seeds.clear();
    assert!(run_experiment(&s).is_err());
    let mut s = tiny_spec(Sweep::KappaSweep);
    s.values = vec![SweepValue::Scalar(1.0)];
    assert!(run_experiment(&s).is_err());
}

fn bench(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_htce-bench"))
        .args(args)
        .env("HTCE_BENCH_THREADS", "1")
        .output()
        .unwrap();
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) {
    std::fs::write(path, serde_json::to_string(value).unwrap()).unwrap();
}

#[test]
fn cli_describe() {
    let (ok, out, _) = bench(&["describe"]);
    assert!(ok);
    assert!(out.contains("100"), "{out}");
    let (ok, out, _) = bench(&["describe", "--json"]);
    assert!(ok);
    assert!(serde_json::from_str::<serde_json::Value>(&out).is_ok());
}

#[test]
fn cli_simulate_and_train() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.json");
    write_json(&sim, &SimConfig::new(FeaturePartition::contiguous(3, 2, 2).unwrap(), 150, 100, 5));
    let data = dir.path().join("data.csv");
    let (ok, out, err) = bench(&["simulate", "--config", sim.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    assert!(ok, "{err}");
    assert!(out.contains("150 source rows"), "{out}");
    assert_eq!(std::fs::read_to_string(&data).unwrap().lines().count(), 251);

    let train = dir.path().join("train.json");
    std::fs::write(&train, r#"{"max_epochs": 2}"#).unwrap();
    let model = dir.path().join("model.json");
    let (ok, out, err) = bench(&[
        "train",
        "--learner",
        "tarnet",
        "--config",
        sim.to_str().unwrap(),
        "--train-config",
        train.to_str().unwrap(),
        "--seed",
        "2",
        "--ablation",
        "no-orth-z",
        "--save",
        model.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    assert!(out.contains("test pehe"), "{out}");
    assert!(ModelManifest::load_json(&model).is_ok());

    let (ok, _, err) = bench(&["train", "--learner", "s", "--mode", "shared", "--config", sim.to_str().unwrap(), "--train-config", train.to_str().unwrap()]);
    assert!(ok, "{err}");
    let (ok, _, err) = bench(&["simulate", "--config", dir.path().join("missing.json").to_str().unwrap(), "--out", data.to_str().unwrap()]);
    assert!(!ok);
    assert!(err.contains("error"), "{err}");
}

#[test]
fn cli_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let mut spec = tiny_spec(Sweep::Benchmark);
    spec.seeds = vec![0, 1];
    write_json(&spec_path, &spec);
    let out_dir = dir.path().join("out");
    let (ok, out, err) = bench(&["run", "--spec", spec_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(ok, "{err}");
    assert!(err.contains("[2/2]"), "{err}");
    assert!(out.contains("target_only"), "{out}");
    let records = read_records_csv(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.len(), 2);
    let report = EvalReport::from_json_file(out_dir.join("report.json")).unwrap();
    assert_eq!(report.records, records);
    assert_eq!(report.spec, spec);
    assert_eq!(read_aggregates_csv(out_dir.join("records_aggregate.csv")).unwrap(), report.aggregates);
    assert!(!out_dir.join("records_failures.csv").exists());
}
