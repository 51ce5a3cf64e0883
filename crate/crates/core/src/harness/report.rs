use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::mean_se;
use super::{ExperimentSpec, Method, Sweep};
use crate::error::{Error, Result};
use crate::learners::LearnerKind;

/// PEHE of one trained cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub sweep: Sweep,
    pub sweep_value: String,
    pub learner: LearnerKind,
    pub method: Method,
    pub seed: u64,
    pub pehe: f64,
    pub wallclock_s: f64,
}

/// A cell whose data generation or training failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub sweep: Sweep,
    pub sweep_value: String,
    pub learner: LearnerKind,
    pub method: Method,
    pub seed: u64,
    pub error: String,
}

/// Mean PEHE and its standard error over the seeds of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sweep: Sweep,
    pub sweep_value: String,
    pub learner: LearnerKind,
    pub method: Method,
    pub n_seeds: usize,
    pub mean_pehe: f64,
    pub std_error: f64,
}

/// Aggregates in order of first appearance of each (value, learner, method).
pub fn aggregate(records: &[Record]) -> Vec<Aggregate> {
    let mut keys: Vec<(Sweep, &str, LearnerKind, Method)> = Vec::new();
    for r in records {
        let k = (r.sweep, r.sweep_value.as_str(), r.learner, r.method);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .filter_map(|(sweep, value, learner, method)| {
            let v: Vec<f64> = records
                .iter()
                .filter(|r| r.sweep == sweep && r.sweep_value == value && r.learner == learner && r.method == method)
                .map(|r| r.pehe)
                .collect();
            mean_se(&v).map(|s| Aggregate {
                sweep,
                sweep_value: value.to_string(),
                learner,
                method,
                n_seeds: s.n,
                mean_pehe: s.mean,
                std_error: s.std_error,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: ExperimentSpec,
    pub records: Vec<Record>,
    pub failures: Vec<Failure>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Invalid(format!("unknown report format `{other}`"))),
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

impl EvalReport {
    pub fn new(spec: ExperimentSpec, records: Vec<Record>, failures: Vec<Failure>) -> Self {
        let aggregates = aggregate(&records);
        Self {
            spec,
            records,
            failures,
            aggregates,
        }
    }

    pub fn find(&self, sweep_value: &str, learner: LearnerKind, method: Method) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.sweep_value == sweep_value && a.learner == learner && a.method == method)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Plain-text table per sweep point: methods as rows, learners as columns,
    /// `mean ± standard error` in each cell.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let methods = self.spec.methods();
        for point in self.spec.points() {
            let label = point.map_or_else(|| super::DEFAULT_POINT.to_string(), |p| p.label());
            out.push_str(&format!("{} = {label}\n", self.spec.sweep));
            out.push_str(&format!("{:<22}", "method"));
            for l in &self.spec.learners {
                out.push_str(&format!("{:>18}", l.as_str()));
            }
            out.push('\n');
            for m in &methods {
                out.push_str(&format!("{:<22}", m.as_str()));
                for l in &self.spec.learners {
                    let cell = self
                        .find(&label, *l, *m)
                        .map_or_else(|| "-".to_string(), |a| format!("{:.4} ± {:.4}", a.mean_pehe, a.std_error));
                    out.push_str(&format!("{cell:>18}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Writes `report` to `path` and returns the files written.
///
/// CSV writes the records to `path`, the aggregates next to it as
/// `<stem>_aggregate.csv` and, if any cell failed, `<stem>_failures.csv`. JSON
/// writes the whole report to `path`.
pub fn emit_report(report: &EvalReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    if report.records.is_empty() && report.failures.is_empty() {
        return Err(Error::Invalid("refusing to emit an empty report".into()));
    }
    match format {
        ReportFormat::Json => {
            std::fs::write(path, serde_json::to_string_pretty(report)?)?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Csv => {
            write_csv(path, &report.records)?;
            let agg = sibling(path, "aggregate");
            write_csv(&agg, &report.aggregates)?;
            let mut written = vec![path.to_path_buf(), agg];
            if !report.failures.is_empty() {
                let f = sibling(path, "failures");
                write_csv(&f, &report.failures)?;
                written.push(f);
            }
            Ok(written)
        }
    }
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    read_csv(path.as_ref())
}

pub fn read_aggregates_csv(path: impl AsRef<Path>) -> Result<Vec<Aggregate>> {
    read_csv(path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, pehe: f64) -> Record {
        Record {
            sweep: Sweep::Benchmark,
            sweep_value: "default".into(),
            learner: LearnerKind::T,
            method: Method::Htce,
            seed,
            pehe,
            wallclock_s: 0.25,
        }
    }

    #[test]
    fn one_record_gives_a_two_line_csv() {
        let dir = tempfile::tempdir().unwrap();
        let report = EvalReport::new(ExperimentSpec::new(Sweep::Benchmark), vec![record(0, 0.1)], vec![]);
        let path = dir.path().join("records.csv");
        let files = emit_report(&report, ReportFormat::Csv, &path).unwrap();
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "sweep,sweep_value,learner,method,seed,pehe,wallclock_s");
        let agg = std::fs::read_to_string(&files[1]).unwrap();
        assert!(agg.starts_with("sweep,sweep_value,learner,method,n_seeds,mean_pehe,std_error"));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![record(0, 0.1), record(1, 0.2), record(2, 1.0 / 3.0)];
        let report = EvalReport::new(ExperimentSpec::new(Sweep::Benchmark), recs, vec![]);
        let csv_path = dir.path().join("r.csv");
        emit_report(&report, ReportFormat::Csv, &csv_path).unwrap();
        assert_eq!(read_records_csv(&csv_path).unwrap(), report.records);
        assert_eq!(read_aggregates_csv(dir.path().join("r_aggregate.csv")).unwrap(), report.aggregates);
        let json_path = dir.path().join("r.json");
        emit_report(&report, ReportFormat::Json, &json_path).unwrap();
        assert_eq!(EvalReport::from_json_file(&json_path).unwrap(), report);
    }

    #[test]
    fn aggregate_of_two_seeds() {
        let a = aggregate(&[record(0, 0.1), record(1, 0.2)]);
        assert_eq!(a.len(), 1);
        assert!((a[0].mean_pehe - 0.15).abs() < 1e-12);
        assert!((a[0].std_error - 0.05).abs() < 1e-12);
    }

    #[test]
    fn empty_report_and_bad_path_fail() {
        let report = EvalReport::new(ExperimentSpec::new(Sweep::Benchmark), vec![], vec![]);
        assert!(emit_report(&report, ReportFormat::Csv, "/nonexistent/x.csv").is_err());
        let report = EvalReport::new(ExperimentSpec::new(Sweep::Benchmark), vec![record(0, 0.1)], vec![]);
        assert!(emit_report(&report, ReportFormat::Csv, "/nonexistent/dir/x.csv").is_err());
    }
}
