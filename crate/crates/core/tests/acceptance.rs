//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its criterion and
//! then asserts it.
//!
//! Criteria 1-5 train full benchmark grids (hours on one core) and are ignored by
//! default; run them with `cargo test --release --test acceptance -- --include-ignored`.
//! `HTCE_BENCH_THREADS` caps how many cells train at once.

mod common;

use std::sync::OnceLock;

use common::*;
use htce::blocks::{orth_feature_grad, orth_feature_loss, SharedPrivateStack, StackSpec};
use htce::harness::{run_experiment_with, CellOutcome, EvalReport, ExperimentSpec, Method, Sweep, SweepValue};
use htce::learners::{
    dr_pseudo_outcome, train_htce, Batch, HtceLearner, LearnerKind, LossWeights, TrainConfig, OUTCOME, PROPENSITY,
    PSEUDO_OUTCOME,
};
use htce::nn::{bce_loss, bce_with_logits_loss, mse_loss, rng_from_seed, Activation, GradStore, Matrix, ParamStore};
use htce::simbench::{assign_treatments, simulate, FeaturePartition, SimConfig};
use rand::RngExt;

fn verdict(id: u8, name: &str, pass: bool, detail: &str) {
    println!("{} [{id}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

// ---------------------------------------------------------------------------
// Experiment criteria

const SEEDS: std::ops::Range<u64> = 0..10;

fn run(spec: &ExperimentSpec) -> EvalReport {
    let total = htce::harness::cells(spec).len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let report = run_experiment_with(spec, &|o| {
        let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        match o {
            CellOutcome::Done(r) => eprintln!(
                "  [{}] {k}/{total} {} {} {} seed {}: {:.4}",
                r.sweep, r.sweep_value, r.learner, r.method, r.seed, r.pehe
            ),
            CellOutcome::Failed(f) => eprintln!("  [{}] {k}/{total} {} {} seed {}: {}", f.sweep, f.learner, f.method, f.seed, f.error),
        }
    })
    .expect("experiment runs");
    println!("{}", report.table());
    assert!(report.failures.is_empty(), "cells failed: {:?}", report.failures);
    report
}

fn mean(report: &EvalReport, value: &str, learner: LearnerKind, method: Method) -> (f64, f64) {
    let a = report.find(value, learner, method).expect("aggregate present");
    assert_eq!(a.n_seeds, SEEDS.count());
    (a.mean_pehe, a.std_error)
}

/// Default benchmark with HTCE, its ablations and the target-only baseline; shared by
/// criteria 1 and 2.
fn benchmark() -> &'static EvalReport {
    static REPORT: OnceLock<EvalReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let mut spec = ExperimentSpec::new(Sweep::Benchmark);
        spec.methods = vec![
            Method::TargetOnly,
            Method::Htce,
            Method::HtceNoPoSharing,
            Method::HtceNoOrthZ,
            Method::HtceNoOrthPo,
        ];
        spec.seeds = SEEDS.collect();
        run(&spec)
    })
}

#[test]
#[ignore = "trains 200 benchmark models"]
fn criterion_1_transfer_gain() {
    let r = benchmark();
    let mut pass = true;
    let mut parts = Vec::new();
    for l in LearnerKind::ALL {
        let (h, _) = mean(r, "default", l, Method::Htce);
        let (t, _) = mean(r, "default", l, Method::TargetOnly);
        pass &= h <= 0.8 * t;
        parts.push(format!("{l}: htce {h:.4} vs target {t:.4} (ratio {:.2})", h / t));
    }
    verdict(1, "transfer gain", pass, &parts.join("; "));
}

#[test]
#[ignore = "trains 200 benchmark models"]
fn criterion_2_ablation_ordering() {
    let r = benchmark();
    let mut pass = true;
    let mut parts = Vec::new();
    for l in LearnerKind::ALL {
        let (full, se_full) = mean(r, "default", l, Method::Htce);
        let mut ties = 0;
        let mut cells = vec![format!("full {full:.4}")];
        for m in [Method::HtceNoPoSharing, Method::HtceNoOrthZ, Method::HtceNoOrthPo] {
            let (abl, se_abl) = mean(r, "default", l, m);
            if full > abl {
                if full - abl <= se_full.max(se_abl) {
                    ties += 1;
                } else {
                    pass = false;
                }
            }
            cells.push(format!("{} {abl:.4}", m.as_str()));
        }
        pass &= ties <= 1;
        parts.push(format!("{l}: {}", cells.join(", ")));
    }
    verdict(2, "ablation ordering", pass, &parts.join("; "));
}

#[test]
#[ignore = "trains 160 models"]
fn criterion_3_alpha_one_convergence() {
    let mut spec = ExperimentSpec::new(Sweep::AlphaSweep);
    spec.methods = vec![Method::SharedFeaturesOnly, Method::Htce];
    spec.values = vec![SweepValue::Scalar(0.1), SweepValue::Scalar(1.0)];
    spec.seeds = SEEDS.collect();
    let r = run(&spec);
    let mut pass = true;
    let mut parts = Vec::new();
    for l in LearnerKind::ALL {
        let (h1, _) = mean(&r, "1", l, Method::Htce);
        let (s1, _) = mean(&r, "1", l, Method::SharedFeaturesOnly);
        let (h01, _) = mean(&r, "0.1", l, Method::Htce);
        let (s01, _) = mean(&r, "0.1", l, Method::SharedFeaturesOnly);
        pass &= (h1 - s1).abs() <= 0.3 * s1 && h01 < s01;
        parts.push(format!(
            "{l}: alpha=1 htce {h1:.4} shared {s1:.4}; alpha=0.1 htce {h01:.4} shared {s01:.4}"
        ));
    }
    verdict(3, "alpha=1 convergence", pass, &parts.join("; "));
}

#[test]
#[ignore = "trains 80 models, some on 4000 target rows"]
fn criterion_4_diminishing_returns_in_target_size() {
    let mut spec = ExperimentSpec::new(Sweep::NtargetSweep);
    spec.learners = vec![LearnerKind::T, LearnerKind::Tarnet];
    spec.methods = vec![Method::TargetOnly, Method::Htce];
    spec.values = vec![SweepValue::Scalar(100.0), SweepValue::Scalar(4000.0)];
    spec.seeds = SEEDS.collect();
    let r = run(&spec);
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [LearnerKind::T, LearnerKind::Tarnet] {
        let gap = |v: &str| mean(&r, v, l, Method::TargetOnly).0 - mean(&r, v, l, Method::Htce).0;
        let (small, large) = (gap("100"), gap("4000"));
        pass &= small > large;
        parts.push(format!("{l}: gap at N_T=100 {small:.4}, at N_T=4000 {large:.4}"));
    }
    verdict(4, "diminishing returns in N_T", pass, &parts.join("; "));
}

#[test]
#[ignore = "trains 20 doubly robust models"]
fn criterion_5_selection_bias_robustness() {
    let mut spec = ExperimentSpec::new(Sweep::KappaSweep);
    spec.learners = vec![LearnerKind::Dr];
    spec.methods = vec![Method::Htce];
    spec.values = vec![SweepValue::Pair([0.0, 0.0]), SweepValue::Pair([10.0, 10.0])];
    spec.seeds = SEEDS.collect();
    let r = run(&spec);
    let (unbiased, _) = mean(&r, "0/0", LearnerKind::Dr, Method::Htce);
    let (biased, _) = mean(&r, "10/10", LearnerKind::Dr, Method::Htce);
    verdict(
        5,
        "selection-bias robustness",
        biased <= 2.0 * unbiased,
        &format!("htce-dr at kappa 10/10 {biased:.4} vs 0/0 {unbiased:.4} (ratio {:.2})", biased / unbiased),
    );
}

// ---------------------------------------------------------------------------
// Gradient correctness

const INSTANCES: u64 = 20;

fn loss_fd(rng_seed: u64, check: impl Fn(&[f64], &[f64]) -> (f64, Vec<f64>), make_pred: impl Fn(&mut htce::nn::Rng) -> f64, target: impl Fn(&mut htce::nn::Rng) -> f64) -> FdReport {
    let mut rng = seeded(rng_seed);
    let n = 7;
    let pred: Vec<f64> = (0..n).map(|_| make_pred(&mut rng)).collect();
    let y: Vec<f64> = (0..n).map(|_| target(&mut rng)).collect();
    let (_, grad) = check(&pred, &y);
    let mut report = FdReport::default();
    for i in 0..n {
        let mut p = pred.clone();
        p[i] += FD_STEP;
        let plus = check(&p, &y).0;
        p[i] -= 2.0 * FD_STEP;
        let minus = check(&p, &y).0;
        report.checked += 1;
        report.max_rel_err = report.max_rel_err.max(rel_err(grad[i], (plus - minus) / (2.0 * FD_STEP)));
    }
    report
}

fn matrix_fd(m: &mut Matrix, analytic: &Matrix, eval: &dyn Fn(&Matrix) -> f64) -> FdReport {
    let mut report = FdReport::default();
    for k in 0..m.data().len() {
        m.data_mut()[k] += FD_STEP;
        let plus = eval(m);
        m.data_mut()[k] -= 2.0 * FD_STEP;
        let minus = eval(m);
        m.data_mut()[k] += FD_STEP;
        report.checked += 1;
        report.max_rel_err = report.max_rel_err.max(rel_err(analytic.data()[k], (plus - minus) / (2.0 * FD_STEP)));
    }
    report
}

/// Narrow learner with random biases. Zero biases would put rows whose ReLU codes are
/// all zero exactly on the SELU kink, where central differences are meaningless.
fn tiny_learner(kind: LearnerKind, seed: u64) -> HtceLearner {
    let enc = htce::blocks::EncoderSpec::new(2, 4, 3);
    let mut learner =
        HtceLearner::with_architecture(kind, enc, TrainConfig::default().with_seed(seed), tiny_architecture()).unwrap();
    let mut rng = seeded(2000 + seed);
    for c in components(kind) {
        randomize_biases(learner.params_mut(c).unwrap(), &mut rng);
    }
    learner
}

fn learner_batches(seed: u64) -> (Batch, Batch) {
    let mut rng = seeded(1000 + seed);
    (random_batch(5, 4, &mut rng), random_batch(4, 3, &mut rng))
}

/// Checks one learner component; `select` picks the scalar being differentiated and
/// `analytic` builds its gradient from `loss_and_gradients` evaluations.
fn learner_fd(
    learner: &mut HtceLearner,
    component: &str,
    source: &Batch,
    target: &Batch,
    weights: LossWeights,
    select: fn(&htce::learners::LossParts) -> f64,
    analytic: &GradStore,
) -> FdReport {
    fd_check(
        learner,
        |l| l.params_mut(component).unwrap(),
        |l| select(&l.loss(component, source, target, weights).unwrap()),
        analytic,
    )
}

fn grad_difference(a: &GradStore, b: &GradStore, store: &ParamStore) -> GradStore {
    let mut out = a.clone();
    for id in store.ids() {
        out.weights_mut(id).add_scaled(b.weights(id), -1.0).unwrap();
        for (x, y) in out.bias_mut(id).iter_mut().zip(b.bias(id)) {
            *x -= y;
        }
    }
    out
}

fn components(kind: LearnerKind) -> Vec<&'static str> {
    match kind {
        LearnerKind::Dr => vec![OUTCOME, PROPENSITY, PSEUDO_OUTCOME],
        _ => vec![OUTCOME],
    }
}

#[test]
fn criterion_6_gradient_correctness() {
    let mut terms: Vec<(&str, FdReport)> = Vec::new();
    let mut add = |name, r: FdReport| match terms.iter_mut().find(|(n, _)| *n == name) {
        Some((_, acc)) => *acc = acc.merge(r),
        None => terms.push((name, r)),
    };

    for seed in 0..INSTANCES {
        // Losses with respect to predictions.
        add(
            "mse",
            loss_fd(seed, |p, y| { let l = mse_loss(p, y).unwrap(); (l.value, l.grad) }, |r| r.random_range(-3.0..3.0), |r| r.random_range(-3.0..3.0)),
        );
        add(
            "bce",
            loss_fd(seed, |p, y| { let l = bce_loss(p, y).unwrap(); (l.value, l.grad) }, |r| r.random_range(0.05..0.95), |r| f64::from(u8::from(r.random_bool(0.5)))),
        );
        add(
            "bce_logits",
            loss_fd(seed, |p, y| { let l = bce_with_logits_loss(p, y).unwrap(); (l.value, l.grad) }, |r| r.random_range(-4.0..4.0), |r| f64::from(u8::from(r.random_bool(0.5)))),
        );

        // Representation orthogonality with respect to all four representation blocks.
        let mut rng = seeded(500 + seed);
        let mut z: Vec<Matrix> = vec![
            random_matrix(5, 3, &mut rng),
            random_matrix(5, 4, &mut rng),
            random_matrix(4, 3, &mut rng),
            random_matrix(4, 4, &mut rng),
        ];
        let g = orth_feature_grad(&z[0], &z[1], &z[2], &z[3]).unwrap();
        let grads = [g.zs_source, g.zp_source, g.zs_target, g.zp_target];
        for i in 0..4 {
            let others = z.clone();
            let eval = move |m: &Matrix| {
                let mut all = others.clone();
                all[i] = m.clone();
                orth_feature_loss(&all[0], &all[1], &all[2], &all[3]).unwrap()
            };
            add("orth_z", matrix_fd(&mut z[i], &grads[i], &eval));
        }

        // Stack-weight orthogonality with respect to every stack weight.
        let mut store = ParamStore::new();
        let spec = StackSpec { input_dim: 5, width: 3, depth: 3, head: Activation::Linear };
        let stack = SharedPrivateStack::build(&mut store, "po", Some(0), spec, &mut rng_from_seed(seed)).unwrap();
        randomize_biases(&mut store, &mut rng);
        let mut g = GradStore::zeros_like(&store);
        stack.orth_po_backward(&store, 1.0, &mut g).unwrap();
        let mut pair = (store, stack);
        add("orth_po", fd_check(&mut pair, |p| &mut p.0, |p| p.1.orth_po_loss(&p.0).unwrap(), &g));

        // Through the networks: data terms, each penalty and the weighted composite.
        let (source, target) = learner_batches(seed);
        for kind in LearnerKind::ALL {
            let mut learner = tiny_learner(kind, seed);
            for c in components(kind) {
                let w0 = LossWeights::DATA_ONLY;
                let wz = LossWeights { orth_z: 1.0, orth_po: 0.0 };
                let wpo = LossWeights { orth_z: 0.0, orth_po: 1.0 };
                let wc = TrainConfig::default().loss_weights();
                assert_eq!((wc.orth_z, wc.orth_po), (0.01, 0.01));
                let (_, g0) = learner.loss_and_gradients(c, &source, &target, w0).unwrap();
                let (_, gz) = learner.loss_and_gradients(c, &source, &target, wz).unwrap();
                let (_, gpo) = learner.loss_and_gradients(c, &source, &target, wpo).unwrap();
                let (_, gc) = learner.loss_and_gradients(c, &source, &target, wc).unwrap();
                let store = learner.params(c).unwrap().clone();
                let dz = grad_difference(&gz, &g0, &store);
                let dpo = grad_difference(&gpo, &g0, &store);
                let data_term = if c == PROPENSITY { "net_bce" } else { "net_mse" };
                add(data_term, learner_fd(&mut learner, c, &source, &target, w0, |p| p.data, &g0));
                add("net_orth_z", learner_fd(&mut learner, c, &source, &target, wz, |p| p.orth_z, &dz));
                add("net_orth_po", learner_fd(&mut learner, c, &source, &target, wpo, |p| p.orth_po, &dpo));
                add("net_composite", learner_fd(&mut learner, c, &source, &target, wc, |p| p.total, &gc));
            }
        }
    }

    let pass = terms.iter().all(|(_, r)| r.max_rel_err <= FD_TOL && r.checked > 0);
    let detail = terms
        .iter()
        .map(|(n, r)| format!("{n} {} checks max rel err {:.1e}", r.checked, r.max_rel_err))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(6, "gradient correctness", pass, &format!("{INSTANCES} instances; {detail}"));
}

// ---------------------------------------------------------------------------
// DR oracle identity

#[test]
fn criterion_7_dr_oracle_identity() {
    let mut rng = seeded(77);
    let mut worst = 0.0f64;
    let mut count = 0;
    for pi in [0.1, 0.5, 0.9] {
        for w in [0u8, 1] {
            for _ in 0..100 {
                let mu0: f64 = rng.random_range(-20.0..20.0);
                let mu1: f64 = rng.random_range(-20.0..20.0);
                let y = if w == 1 { mu1 } else { mu0 };
                let phi = dr_pseudo_outcome(y, w, mu0, mu1, pi).unwrap();
                worst = worst.max((phi - (mu1 - mu0)).abs());
                count += 1;
            }
        }
    }
    verdict(
        7,
        "DR oracle identity",
        worst <= 1e-8 && count == 600,
        &format!("{count} cases, max |pseudo-outcome - tau| = {worst:.2e}"),
    );
}

// ---------------------------------------------------------------------------
// Simulator statistics and determinism

#[test]
fn criterion_8_simulator_statistics() {
    let partition = FeaturePartition::contiguous(10, 10, 10).unwrap();
    let mut cfg = SimConfig::new(partition, 10_000, 10_000, 8);
    cfg.kappa_source = 0.0;
    cfg.kappa_target = 0.0;
    let pair = simulate(&cfg, None).unwrap();
    let frac_r = pair.source.treated_fraction();
    let frac_t = pair.target.treated_fraction();
    let (w, _) = assign_treatments(&vec![0.0; 10_000], &vec![5.0; 10_000], 0.0, &mut seeded(3)).unwrap();
    let frac_direct = w.iter().filter(|&&v| v == 1).count() as f64 / 1e4;
    let fractions_ok = [frac_r, frac_t, frac_direct].iter().all(|f| (0.45..=0.55).contains(f));

    let mut tau_exact = true;
    for ds in [&pair.source, &pair.target] {
        for i in 0..ds.len() {
            tau_exact &= ds.tau[i] == ds.mu1[i] - ds.mu0[i];
        }
    }

    let data_identical = simulate(&cfg, None).unwrap() == pair;
    let a = small_pair(300, 120, 5);
    let b = small_pair(300, 120, 5);
    let mut tc = TrainConfig::default().with_seed(9);
    tc.max_epochs = 5;
    let ma = train_htce(LearnerKind::Tarnet, &a.source, &a.target, &tc).unwrap();
    let mb = train_htce(LearnerKind::Tarnet, &b.source, &b.target, &tc).unwrap();
    let training_identical = a == b
        && ma.manifest().unwrap() == mb.manifest().unwrap()
        && ma.histories() == mb.histories();

    verdict(
        8,
        "simulator statistics",
        fractions_ok && tau_exact && data_identical && training_identical,
        &format!(
            "treated fraction at kappa=0: source {frac_r:.4}, target {frac_t:.4}, assignment {frac_direct:.4}; \
             tau == mu1 - mu0 exactly: {tau_exact}; identical datasets: {data_identical}; \
             identical training: {training_identical}"
        ),
    );
}

// ---------------------------------------------------------------------------
// Gradient isolation

/// Largest gradient magnitude over parameters whose key contains `needle`, and the
/// number of such parameters.
fn max_grad_where(store: &ParamStore, grads: &GradStore, needle: &str) -> (f64, usize) {
    let ids: Vec<_> = store.ids().filter(|&id| store.key(id).contains(needle)).collect();
    (ids.iter().map(|&id| grads.max_abs(id)).fold(0.0, f64::max), ids.len())
}

#[test]
fn criterion_9_gradient_isolation() {
    // The stack-weight penalty does not depend on data, so it is switched off here;
    // the representation penalty stays on.
    let weights = LossWeights { orth_z: 0.01, orth_po: 0.0 };
    let mut rng = seeded(99);
    let source = random_batch(16, 9, &mut rng);
    let target = random_batch(16, 7, &mut rng);
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in LearnerKind::ALL {
        let learner = HtceLearner::new(kind, htce::blocks::EncoderSpec::new(5, 9, 7), TrainConfig::default().with_seed(1)).unwrap();
        for c in components(kind) {
            let store = learner.params(c).unwrap();
            let (_, g_src) = learner.loss_and_gradients(c, &source, &Batch::empty(7), weights).unwrap();
            let (_, g_tgt) = learner.loss_and_gradients(c, &Batch::empty(9), &target, weights).unwrap();
            let (leak_t, n_t) = max_grad_where(store, &g_src, "private_target");
            let (leak_s, n_s) = max_grad_where(store, &g_tgt, "private_source");
            let (own_s, _) = max_grad_where(store, &g_src, "private_source");
            let (own_t, _) = max_grad_where(store, &g_tgt, "private_target");
            let ok = leak_t == 0.0 && leak_s == 0.0 && n_t > 0 && n_s > 0 && own_s > 0.0 && own_t > 0.0;
            pass &= ok;
            parts.push(format!(
                "htce-{kind}/{c}: {n_t} target-private layers max |g| {leak_t:e} from source, {n_s} source-private layers max |g| {leak_s:e} from target"
            ));
        }
    }
    verdict(9, "gradient isolation", pass, &parts.join("; "));
}
