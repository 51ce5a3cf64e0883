//! Keyed parameter storage shared by every model, plus the matching gradient buffers.

use serde::{Deserialize, Serialize};

use super::{DenseGrads, DenseLayer, Matrix};
use crate::error::{shape_err, Error, Result};

/// Handle to a layer inside a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerId(pub(crate) usize);

impl LayerId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    /// `block/arm/layer/subspace` style key.
    pub key: String,
    pub layer: DenseLayer,
    /// Frozen entries keep their values through optimiser steps.
    pub trainable: bool,
}

/// All dense layers of one model, addressed by [`LayerId`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: impl Into<String>, layer: DenseLayer) -> LayerId {
        self.entries.push(ParamEntry {
            key: key.into(),
            layer,
            trainable: true,
        });
        LayerId(self.entries.len() - 1)
    }

    pub fn layer(&self, id: LayerId) -> &DenseLayer {
        &self.entries[id.0].layer
    }

    pub fn layer_mut(&mut self, id: LayerId) -> &mut DenseLayer {
        &mut self.entries[id.0].layer
    }

    pub fn key(&self, id: LayerId) -> &str {
        &self.entries[id.0].key
    }

    /// Zeroes a layer and excludes it from optimisation.
    pub fn freeze_at_zero(&mut self, id: LayerId) {
        let e = &mut self.entries[id.0];
        e.layer.weights.data_mut().iter_mut().for_each(|v| *v = 0.0);
        e.layer.bias.iter_mut().for_each(|v| *v = 0.0);
        e.trainable = false;
    }

    pub fn set_trainable(&mut self, id: LayerId, trainable: bool) {
        self.entries[id.0].trainable = trainable;
    }

    pub fn is_trainable(&self, id: LayerId) -> bool {
        self.entries[id.0].trainable
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = LayerId> {
        (0..self.entries.len()).map(LayerId)
    }

    pub fn find(&self, key: &str) -> Option<LayerId> {
        self.entries.iter().position(|e| e.key == key).map(LayerId)
    }

    pub fn num_params(&self) -> usize {
        self.entries.iter().map(|e| e.layer.num_params()).sum()
    }

    /// Copies values from a store with identical layout (used for snapshots).
    pub fn copy_values_from(&mut self, other: &ParamStore) -> Result<()> {
        if self.entries.len() != other.entries.len() {
            return shape_err("ParamStore::copy_values_from", self.entries.len(), other.entries.len());
        }
        for (dst, src) in self.entries.iter_mut().zip(&other.entries) {
            if dst.key != src.key || dst.layer.weights.shape() != src.layer.weights.shape() {
                return Err(Error::Invalid(format!("layout mismatch at {}", dst.key)));
            }
            dst.layer.weights.data_mut().copy_from_slice(src.layer.weights.data());
            dst.layer.bias.copy_from_slice(&src.layer.bias);
        }
        Ok(())
    }
}

/// Gradient buffers laid out like a [`ParamStore`].
#[derive(Clone, Debug)]
pub struct GradStore {
    weights: Vec<Matrix>,
    bias: Vec<Vec<f64>>,
}

impl GradStore {
    pub fn zeros_like(store: &ParamStore) -> Self {
        Self {
            weights: store
                .entries
                .iter()
                .map(|e| Matrix::zeros(e.layer.in_dim(), e.layer.out_dim()))
                .collect(),
            bias: store.entries.iter().map(|e| vec![0.0; e.layer.out_dim()]).collect(),
        }
    }

    pub fn clear(&mut self) {
        for w in &mut self.weights {
            w.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
        for b in &mut self.bias {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn weights(&self, id: LayerId) -> &Matrix {
        &self.weights[id.0]
    }

    pub fn weights_mut(&mut self, id: LayerId) -> &mut Matrix {
        &mut self.weights[id.0]
    }

    pub fn bias(&self, id: LayerId) -> &[f64] {
        &self.bias[id.0]
    }

    pub fn bias_mut(&mut self, id: LayerId) -> &mut [f64] {
        &mut self.bias[id.0]
    }

    pub fn add_dense(&mut self, id: LayerId, g: &DenseGrads) -> Result<()> {
        self.weights[id.0].add_scaled(&g.weights, 1.0)?;
        let b = &mut self.bias[id.0];
        if b.len() != g.bias.len() {
            return shape_err("GradStore::add_dense", b.len(), g.bias.len());
        }
        for (a, v) in b.iter_mut().zip(&g.bias) {
            *a += v;
        }
        Ok(())
    }

    /// Adds `scale * g` into the first `g.rows()` rows of a weight gradient.
    pub fn add_weight_rows(&mut self, id: LayerId, g: &Matrix, scale: f64) -> Result<()> {
        let w = &mut self.weights[id.0];
        if g.cols() != w.cols() || g.rows() > w.rows() {
            return shape_err(
                "GradStore::add_weight_rows",
                format!("<= {:?}", w.shape()),
                format!("{:?}", g.shape()),
            );
        }
        let n = g.data().len();
        for (a, v) in w.data_mut()[..n].iter_mut().zip(g.data()) {
            *a += scale * v;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
            && self.bias.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// Largest absolute entry over a layer's weights and bias.
    pub fn max_abs(&self, id: LayerId) -> f64 {
        let w = self.weights[id.0].data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.bias[id.0].iter().fold(w, |m, v| m.max(v.abs()))
    }
}
