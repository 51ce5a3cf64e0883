//! Minimal deterministic neural-network engine.
//!
//! Everything runs in `f64` on dense row-major matrices. Layers return an explicit
//! cache from their forward pass which the backward pass consumes, so a model can run
//! the same layer over several batches (source and target) before differentiating.
//! Parameters of a model live in one [`ParamStore`]; gradients accumulate in a
//! [`GradStore`] with the same layout and [`AdamState`] applies the update.

mod activation;
mod adam;
mod layer;
mod loss;
mod matrix;
mod mlp;
mod orth;
mod params;

pub use activation::{sigmoid, Activation, SELU_ALPHA, SELU_LAMBDA};
pub use adam::{adam_update, AdamConfig, AdamState};
pub use layer::{DenseCache, DenseGrads, DenseLayer};
pub use loss::{bce_loss, bce_with_logits_loss, mse_loss, LossGrad};
pub use matrix::Matrix;
pub use mlp::{Mlp, MlpCache};
pub use orth::{frobenius_orth, frobenius_orth_grad, OrthPenalty};
pub use params::{GradStore, LayerId, ParamEntry, ParamStore};

use rand::SeedableRng;

/// Seedable generator used throughout; identical seeds give identical streams.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Deterministically combines seed material (splitmix64 finaliser over each word).
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Stable 64-bit FNV-1a hash of a label, for feeding strings into [`mix_seed`].
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
