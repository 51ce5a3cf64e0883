use serde::{Deserialize, Serialize};

use super::{EncoderCache, EncoderSpec, EncoderTriple, SharedPrivateStack, StackCache, StackSpec};
use crate::error::Result;
use crate::nn::{Activation, GradStore, Matrix, ParamStore, Rng};
use crate::Domain;

/// Encoder triple plus a single sigmoid-headed stack estimating `π(x)` in both domains.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropensityBlock {
    pub encoder: EncoderTriple,
    pub stack: SharedPrivateStack,
}

pub struct PropensityCache {
    pub encoder: EncoderCache,
    pub stack: StackCache,
}

impl PropensityBlock {
    pub fn build(store: &mut ParamStore, enc: EncoderSpec, depth: usize, rng: &mut Rng) -> Result<Self> {
        let encoder = EncoderTriple::build(store, "prop_enc", None, enc, rng)?;
        let mut spec = StackSpec::new(enc.output_width(), depth, Activation::Sigmoid);
        spec.width = enc.width_shared.max(enc.width_private);
        let stack = SharedPrivateStack::build(store, "prop", None, spec, rng)?;
        Ok(Self { encoder, stack })
    }

    /// Logits of `π̂` with caches for backpropagation.
    pub fn forward(&self, store: &ParamStore, x: &Matrix, domain: Domain) -> Result<(Matrix, PropensityCache)> {
        let (repr, ec) = self.encoder.encode(store, x, domain, None)?;
        let (logits, sc) = self.stack.forward(store, &repr.concat(), domain)?;
        Ok((logits, PropensityCache { encoder: ec, stack: sc }))
    }

    pub fn backward(&self, store: &ParamStore, cache: &PropensityCache, d_logits: &Matrix, grads: &mut GradStore) -> Result<()> {
        let g_phi = self.stack.backward(store, &cache.stack, d_logits, grads)?;
        self.encoder.backward_concat(store, &cache.encoder, &g_phi, grads)
    }

    /// `π̂ ∈ (0, 1)`.
    pub fn predict(&self, store: &ParamStore, x: &Matrix, domain: Domain) -> Result<Vec<f64>> {
        let repr = self.encoder.infer(store, x, domain, None)?;
        self.stack.predict(store, &repr.concat(), domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::rng_from_seed;

    #[test]
    fn zero_head_predicts_one_half() {
        let mut store = ParamStore::new();
        let block = PropensityBlock::build(&mut store, EncoderSpec::new(2, 4, 3), 2, &mut rng_from_seed(0)).unwrap();
        let last = *block.stack.layers().last().unwrap();
        for id in [last.shared, last.private_source, last.private_target] {
            store.freeze_at_zero(id);
        }
        let p = block.predict(&store, &Matrix::filled(5, 3, 0.4), Domain::Target).unwrap();
        assert!(p.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn outputs_stay_inside_unit_interval() {
        let mut store = ParamStore::new();
        let block = PropensityBlock::build(&mut store, EncoderSpec::new(2, 4, 3), 3, &mut rng_from_seed(1)).unwrap();
        let x = Matrix::from_rows(&[[0.0, 1.0, 0.5, 0.2], [1.0, 1.0, 1.0, 1.0]]).unwrap();
        let p = block.predict(&store, &x, Domain::Source).unwrap();
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
