use std::time::Instant;

use rayon::prelude::*;

use super::report::{EvalReport, Failure, Record};
use super::{pehe, ExperimentSpec, Method, SweepValue, DEFAULT_POINT};
use crate::error::{Error, Result};
use crate::learners::{train_baseline, train_htce, CateModel, LearnerKind};
use crate::nn::{label_hash, mix_seed, rng_from_seed};
use crate::simbench::{sample_partition, simulate_split, SplitPair};

/// Caps the number of cells trained concurrently.
pub const THREADS_ENV: &str = "HTCE_BENCH_THREADS";

/// One (sweep point, seed, learner, method) unit of work.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub point: Option<SweepValue>,
    pub seed: u64,
    pub learner: LearnerKind,
    pub method: Method,
}

impl Cell {
    pub fn label(&self) -> String {
        self.point.map_or_else(|| DEFAULT_POINT.to_string(), |p| p.label())
    }
}

/// Result of one cell as passed to progress callbacks.
#[derive(Clone, Debug)]
pub enum CellOutcome<'a> {
    Done(&'a Record),
    Failed(&'a Failure),
}

/// Cells in report order: sweep point, then seed, learner and method.
pub fn cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let methods = spec.methods();
    let mut out = Vec::new();
    for point in spec.points() {
        for &seed in &spec.seeds {
            for &learner in &spec.learners {
                for &method in &methods {
                    out.push(Cell {
                        point,
                        seed,
                        learner,
                        method,
                    });
                }
            }
        }
    }
    out
}

/// Seed of the simulated data for one run. Every method, learner and sweep point of
/// a run sees the same partition, covariates and coefficients.
pub fn data_seed(seed: u64) -> u64 {
    mix_seed(&[seed, label_hash("data")])
}

/// Seed of the model trained in `cell`; independent of which other cells exist.
pub fn model_seed(cell: &Cell) -> u64 {
    let [a, b] = cell.point.map_or([0, 0], SweepValue::seed_bits);
    mix_seed(&[
        cell.seed,
        a,
        b,
        label_hash(cell.learner.as_str()),
        label_hash(cell.method.as_str()),
    ])
}

/// Simulated source and target data for one sweep point and run.
pub fn generate_data(spec: &ExperimentSpec, point: Option<SweepValue>, seed: u64) -> Result<SplitPair> {
    let ds = data_seed(seed);
    let partition = sample_partition(spec.sim.d_full, &mut rng_from_seed(mix_seed(&[ds, label_hash("partition")])))?;
    let config = spec.sim.config(spec.sweep, point, partition, ds)?;
    simulate_split(&config, None)
}

/// Trains the cell's model and scores it on the target test split.
pub fn run_cell(spec: &ExperimentSpec, cell: &Cell, data: &SplitPair) -> Result<f64> {
    let mut cfg = spec.train.clone().with_seed(model_seed(cell));
    let test = &data.target.test;
    let tau_hat = match cell.method.baseline_mode() {
        Some(mode) => train_baseline(&data.target, cell.learner, mode, &cfg)?.predict_cate(&test.x)?,
        None => {
            cfg.ablation = cell.method.ablation();
            train_htce(cell.learner, &data.source, &data.target, &cfg)?.predict_cate(&test.x)?
        }
    };
    pehe(&tau_hat, &test.tau)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Invalid(format!("thread pool: {e}")))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<EvalReport> {
    run_experiment_with(spec, &|_| {})
}

/// Runs every cell of `spec`, calling `progress` as cells finish.
///
/// Cells run in parallel; records come out in [`cells`] order regardless of
/// scheduling. A failing cell is reported as a [`Failure`] and the grid continues.
pub fn run_experiment_with(spec: &ExperimentSpec, progress: &(dyn Fn(CellOutcome<'_>) + Sync)) -> Result<EvalReport> {
    spec.validate()?;
    let pool = thread_pool()?;
    let points = spec.points();
    let data_keys: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| spec.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let cells = cells(spec);
    let outcomes: Vec<std::result::Result<Record, Failure>> = pool.install(|| {
        let data: Vec<Result<SplitPair>> = data_keys
            .par_iter()
            .map(|&(p, s)| generate_data(spec, points[p], s))
            .collect();
        cells
            .par_iter()
            .map(|cell| {
                let p = points.iter().position(|q| *q == cell.point).expect("cell point comes from spec");
                let k = data_keys.iter().position(|&key| key == (p, cell.seed)).expect("data generated per key");
                let start = Instant::now();
                let result = data[k]
                    .as_ref()
                    .map_err(|e| Error::Invalid(format!("data generation: {e}")))
                    .and_then(|d| run_cell(spec, cell, d));
                let out = match result {
                    Ok(pehe) => Ok(Record {
                        sweep: spec.sweep,
                        sweep_value: cell.label(),
                        learner: cell.learner,
                        method: cell.method,
                        seed: cell.seed,
                        pehe,
                        wallclock_s: start.elapsed().as_secs_f64(),
                    }),
                    Err(e) => Err(Failure {
                        sweep: spec.sweep,
                        sweep_value: cell.label(),
                        learner: cell.learner,
                        method: cell.method,
                        seed: cell.seed,
                        error: e.to_string(),
                    }),
                };
                match &out {
                    Ok(r) => progress(CellOutcome::Done(r)),
                    Err(f) => progress(CellOutcome::Failed(f)),
                }
                out
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(EvalReport::new(spec.clone(), records, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Sweep;

    #[test]
    fn model_seeds_differ_per_cell_and_ignore_neighbours() {
        let mut spec = ExperimentSpec::new(Sweep::AlphaSweep);
        spec.values = vec![SweepValue::Scalar(0.1), SweepValue::Scalar(0.2)];
        spec.seeds = vec![0, 1];
        let all = cells(&spec);
        assert_eq!(all.len(), 2 * 2 * 4 * 3);
        let mut seeds: Vec<u64> = all.iter().map(model_seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), all.len());
        spec.values.truncate(1);
        let fewer = cells(&spec);
        for c in &fewer {
            assert!(all.contains(c));
        }
    }

    #[test]
    fn data_is_shared_across_methods_and_deterministic() {
        let mut spec = ExperimentSpec::new(Sweep::Benchmark);
        spec.sim.n_source = 100;
        spec.sim.n_target = 50;
        let a = generate_data(&spec, None, 4).unwrap();
        let b = generate_data(&spec, None, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_data(&spec, None, 5).unwrap());
    }
}
