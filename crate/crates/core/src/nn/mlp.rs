use super::{Activation, DenseCache, DenseLayer, GradStore, LayerId, Matrix, ParamStore, Rng};
use crate::error::Result;

/// A chain of dense layers living in a [`ParamStore`].
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Mlp {
    layers: Vec<LayerId>,
}

#[derive(Clone, Debug)]
pub struct MlpCache {
    caches: Vec<DenseCache>,
}

impl Mlp {
    /// `dims = [in, h1, .., out]`; hidden layers use `hidden`, the last layer `output`.
    /// Layer `i` (1-based) is stored under `{prefix}/l{i}`.
    pub fn build(
        store: &mut ParamStore,
        prefix: &str,
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut Rng,
    ) -> Self {
        Self::build_keyed(store, dims, hidden, output, rng, |i| format!("{prefix}/l{i}"))
    }

    /// As [`Mlp::build`] with caller-chosen keys; `key` receives the 1-based layer index.
    pub fn build_keyed(
        store: &mut ParamStore,
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut Rng,
        key: impl Fn(usize) -> String,
    ) -> Self {
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                store.add(key(i + 1), DenseLayer::init(dims[i], dims[i + 1], act, rng))
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[LayerId] {
        &self.layers
    }

    pub fn in_dim(&self, store: &ParamStore) -> usize {
        store.layer(self.layers[0]).in_dim()
    }

    pub fn out_dim(&self, store: &ParamStore) -> usize {
        store.layer(*self.layers.last().expect("non-empty")).out_dim()
    }

    pub fn forward(&self, store: &ParamStore, input: &Matrix) -> Result<(Matrix, MlpCache)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut h = input.clone();
        for &id in &self.layers {
            let (out, cache) = store.layer(id).forward(&h)?;
            caches.push(cache);
            h = out;
        }
        Ok((h, MlpCache { caches }))
    }

    pub fn infer(&self, store: &ParamStore, input: &Matrix) -> Result<Matrix> {
        let mut h = store.layer(self.layers[0]).infer(input)?;
        for &id in &self.layers[1..] {
            h = store.layer(id).infer(&h)?;
        }
        Ok(h)
    }

    /// Accumulates parameter gradients and returns `dL/d(input)`.
    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &MlpCache,
        upstream: &Matrix,
        grads: &mut GradStore,
    ) -> Result<Matrix> {
        let mut g = upstream.clone();
        for (&id, c) in self.layers.iter().zip(&cache.caches).rev() {
            let dg = store.layer(id).backward(c, &g)?;
            grads.add_dense(id, &dg)?;
            g = dg.input;
        }
        Ok(g)
    }
}
