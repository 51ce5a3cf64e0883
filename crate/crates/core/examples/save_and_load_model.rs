//! Trains a TARNet-style HTCE model, writes its manifest to disk, reloads it and
//! checks that the reloaded model predicts identical effects.
//!
//! `cargo run --release --example save_and_load_model -- [path]`

use htce::learners::{train_htce, CateModel, LearnerKind, TrainConfig, TrainedModel};
use htce::simbench::{simulate_split, FeaturePartition, SimConfig};

fn main() -> htce::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("htce_tarnet.json"));

    let partition = FeaturePartition::contiguous(6, 4, 3)?;
    let data = simulate_split(&SimConfig::new(partition, 600, 120, 11), None)?;
    let mut cfg = TrainConfig::default().with_seed(11);
    cfg.max_epochs = 30;
    let model = train_htce(LearnerKind::Tarnet, &data.source, &data.target, &cfg)?;
    model.manifest()?.save_json(&path)?;
    println!("saved {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());

    let loaded = TrainedModel::load_json(&path)?;
    let x = &data.target.test.x;
    let before = model.predict_cate(x)?;
    let after = loaded.predict_cate(x)?;
    let max_diff = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("{} reloaded; max |tau_before - tau_after| = {max_diff:e}", loaded.name());
    Ok(())
}
