//! Helpers shared by the integration tests: small architectures, random batches,
//! simulated data and a central finite-difference gradient checker.

#![allow(dead_code)]

use htce::learners::{architecture, Batch, HtceArchitecture};
use htce::nn::{rng_from_seed, GradStore, Matrix, ParamStore, Rng};
use htce::simbench::{simulate_split, FeaturePartition, SimConfig, SplitPair};
use rand::RngExt;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-4;
/// Denominator floor of the relative error; gradients below it are compared on an
/// absolute `FD_TOL * FD_FLOOR` scale.
pub const FD_FLOOR: f64 = 1e-6;

/// Narrow networks so every parameter can be perturbed.
pub fn tiny_architecture() -> HtceArchitecture {
    let mut a = architecture().htce.clone();
    a.encoder_units = 3;
    a.stack_units = 3;
    a.tarnet_representation_layers = 2;
    a.tarnet_representation_units = 3;
    let d = &mut a.stack_depth;
    d.s = 3;
    d.t = 3;
    d.dr_outcome = 3;
    d.dr_propensity = 3;
    d.dr_pseudo_outcome = 3;
    d.tarnet = 2;
    a
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Random covariates in `[0, 1)`, both arms present when `n >= 2`, outcomes in `[-2, 2)`.
pub fn random_batch(n: usize, d: usize, rng: &mut Rng) -> Batch {
    let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random::<f64>()).collect()).unwrap();
    let w = (0..n).map(|i| if i < 2 { i as u8 } else { u8::from(rng.random_bool(0.5)) }).collect();
    let y = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    Batch::new(x, w, y).unwrap()
}


pub fn seeded(seed: u64) -> Rng {
    rng_from_seed(seed)
}

/// Small simulated pair with a contiguous partition.
pub fn small_pair(n_source: usize, n_target: usize, seed: u64) -> SplitPair {
    let partition = FeaturePartition::contiguous(4, 3, 2).unwrap();
    simulate_split(&SimConfig::new(partition, n_source, n_target, seed), None).unwrap()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FdReport {
    pub checked: usize,
    pub max_rel_err: f64,
}

impl FdReport {
    pub fn merge(self, other: FdReport) -> FdReport {
        FdReport {
            checked: self.checked + other.checked,
            max_rel_err: self.max_rel_err.max(other.max_rel_err),
        }
    }
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_FLOOR)
}

/// Compares `analytic` against central differences of `eval` for every trainable
/// weight and bias reachable through `store`.
pub fn fd_check<M>(
    model: &mut M,
    store: impl Fn(&mut M) -> &mut ParamStore,
    eval: impl Fn(&M) -> f64,
    analytic: &GradStore,
) -> FdReport {
    let ids: Vec<_> = store(model).ids().collect();
    let mut report = FdReport::default();
    for id in ids {
        if !store(model).is_trainable(id) {
            continue;
        }
        let n_w = store(model).layer(id).weights.data().len();
        let n_b = store(model).layer(id).bias.len();
        for k in 0..n_w + n_b {
            let bump = |m: &mut M, delta: f64| {
                let layer = store(m).layer_mut(id);
                if k < n_w {
                    layer.weights.data_mut()[k] += delta;
                } else {
                    layer.bias[k - n_w] += delta;
                }
            };
            bump(model, FD_STEP);
            let plus = eval(model);
            bump(model, -2.0 * FD_STEP);
            let minus = eval(model);
            bump(model, FD_STEP);
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let a = if k < n_w {
                analytic.weights(id).data()[k]
            } else {
                analytic.bias(id)[k - n_w]
            };
            report.checked += 1;
            report.max_rel_err = report.max_rel_err.max(rel_err(a, numeric));
        }
    }
    report
}

pub fn randomize_biases(store: &mut ParamStore, rng: &mut Rng) {
    for id in store.ids().collect::<Vec<_>>() {
        if store.is_trainable(id) {
            for b in &mut store.layer_mut(id).bias {
                *b = rng.random_range(-0.5..0.5);
            }
        }
    }
}
