//! Doubly robust pseudo-outcomes: with the true nuisances their mean recovers the
//! average effect; with a zero outcome model only the inverse-propensity term is
//! left, which stays unbiased but is noisier. Finally trains HTCE-DR with oracle
//! nuisances on a small draw.
//!
//! `cargo run --release --example dr_pseudo_outcomes`

use htce::harness::pehe;
use htce::learners::{dr_pseudo_outcomes, train_htce_dr_oracle, CateModel, TrainConfig};
use htce::nn::{label_hash, mix_seed, rng_from_seed};
use htce::simbench::{sample_partition, simulate_split, SimConfig};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> htce::Result<()> {
    let partition = sample_partition(30, &mut rng_from_seed(mix_seed(&[3, label_hash("partition")])))?;
    let data = simulate_split(&SimConfig::new(partition, 3000, 3000, 3), None)?;
    let t = &data.target.train;

    let exact = dr_pseudo_outcomes(&t.y, &t.w, &t.mu0, &t.mu1, &t.pi)?;
    let zeros = vec![0.0; t.len()];
    let wrong_outcome = dr_pseudo_outcomes(&t.y, &t.w, &zeros, &zeros, &t.pi)?;
    println!("true ate                      {:.3}", mean(&t.tau));
    println!("mean pseudo-outcome, true mu  {:.3}", mean(&exact));
    println!("mean pseudo-outcome, mu = 0   {:.3}", mean(&wrong_outcome));

    let small = simulate_split(
        &SimConfig::new(
            sample_partition(30, &mut rng_from_seed(mix_seed(&[4, label_hash("partition")])))?,
            1000,
            300,
            4,
        ),
        None,
    )?;
    let model = train_htce_dr_oracle(&small.source, &small.target, &TrainConfig::default().with_seed(4))?;
    let test = &small.target.test;
    println!(
        "oracle-nuisance htce-dr test pehe {:.4}",
        pehe(&model.predict_cate(&test.x)?, &test.tau)?
    );
    Ok(())
}
