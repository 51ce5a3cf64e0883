//! Draws one semi-synthetic source/target pair and summarises each split.
//!
//! `cargo run --release --example simulate_benchmark -- [alpha] [out.csv]`

use htce::nn::{label_hash, mix_seed, rng_from_seed};
use htce::simbench::{sample_partition, simulate_split, write_pair_csv, Dataset, SimConfig};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn summary(name: &str, d: &Dataset) {
    let ate = mean(&d.tau);
    let sd = (d.tau.iter().map(|t| (t - ate).powi(2)).sum::<f64>() / d.len() as f64).sqrt();
    println!(
        "{name:<18} n {:>5}  d {:>2}  treated {:.2}  mean pi {:.2}  ate {ate:>7.3}  sd(tau) {sd:.3}",
        d.len(),
        d.x.cols(),
        d.treated_fraction(),
        mean(&d.pi)
    );
}

fn main() -> htce::Result<()> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let out = args.next();

    let partition = sample_partition(30, &mut rng_from_seed(mix_seed(&[7, label_hash("partition")])))?;
    println!(
        "partition: {} shared, {} source-private, {} target-private",
        partition.d_shared, partition.d_private_source, partition.d_private_target
    );
    let mut cfg = SimConfig::new(partition, 3000, 300, 7);
    cfg.alpha = alpha;
    let pair = simulate_split(&cfg, None)?;
    for (domain, s) in [("source", &pair.source), ("target", &pair.target)] {
        summary(&format!("{domain}/train"), &s.train);
        summary(&format!("{domain}/validation"), &s.validation);
        summary(&format!("{domain}/test"), &s.test);
    }
    if let Some(path) = out {
        write_pair_csv(&pair, std::fs::File::create(&path)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
