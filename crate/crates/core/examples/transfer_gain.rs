//! Trains HTCE and both baselines of one variant on a benchmark draw and compares
//! their PEHE on the target test split.
//!
//! `cargo run --release --example transfer_gain -- [s|t|dr|tarnet] [seed]`

use std::time::Instant;

use htce::harness::{generate_data, pehe, ExperimentSpec, Sweep};
use htce::learners::{train_baseline, train_htce, BaselineMode, CateModel, LearnerKind, TrainConfig};

fn main() -> htce::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: LearnerKind = args.next().as_deref().unwrap_or("t").parse()?;
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let data = generate_data(&ExperimentSpec::new(Sweep::Benchmark), None, seed)?;
    let cfg = TrainConfig::default().with_seed(seed);
    let test = &data.target.test;

    let t0 = Instant::now();
    let htce = train_htce(kind, &data.source, &data.target, &cfg)?;
    let epochs: Vec<usize> = htce.histories().iter().map(|(_, h)| h.epochs.len()).collect();
    println!(
        "htce-{kind}: pehe {:.4}  epochs {epochs:?}  {:.1}s",
        pehe(&htce.predict_cate(&test.x)?, &test.tau)?,
        t0.elapsed().as_secs_f64()
    );

    for mode in [BaselineMode::TargetOnly, BaselineMode::SharedFeaturesOnly] {
        let t0 = Instant::now();
        let base = train_baseline(&data.target, kind, mode, &cfg)?;
        let epochs: Vec<usize> = base.histories().iter().map(|(_, h)| h.epochs.len()).collect();
        println!(
            "{mode}-{kind}: pehe {:.4}  epochs {epochs:?}  {:.1}s",
            pehe(&base.predict_cate(&test.x)?, &test.tau)?,
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
