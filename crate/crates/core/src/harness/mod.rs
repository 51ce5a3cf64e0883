//! Experiment grids over the simulated benchmark.
//!
//! An [`ExperimentSpec`] names a sweep, the learners and methods to compare and the
//! seeds to average over. [`run_experiment`] simulates data per run, trains every
//! cell, scores it by PEHE on the target test split and aggregates over seeds;
//! [`emit_report`] writes the result as CSV or JSON.

mod metrics;
mod report;
mod run;
mod spec;

pub use metrics::{mean_se, pehe, MeanSe};
pub use report::{
    aggregate, emit_report, read_aggregates_csv, read_records_csv, Aggregate, EvalReport, Failure, Record, ReportFormat,
};
pub use run::{
    cells, data_seed, generate_data, model_seed, run_cell, run_experiment, run_experiment_with, Cell, CellOutcome,
    THREADS_ENV,
};
pub use spec::{ExperimentSpec, Method, SimTemplate, Sweep, SweepValue, DEFAULT_POINT};
