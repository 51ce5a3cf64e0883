//! Single-domain networks of the baseline learners.

use serde::{Deserialize, Serialize};

use super::architecture::architecture;
use super::nets::{factual, HeadLoss};
use super::train::{LossParts, Objective};
use super::{Batch, LossWeights};
use crate::blocks::ParamKey;
use crate::error::{Error, Result};
use crate::nn::{mse_loss, Activation, GradStore, Matrix, Mlp, ParamStore, Rng};

fn build_mlp(store: &mut ParamStore, block: &str, arm: Option<u8>, dims: &[usize], output: Activation, rng: &mut Rng) -> Mlp {
    Mlp::build_keyed(store, dims, Activation::Relu, output, rng, |l| {
        ParamKey::new(block, arm, l, "dense").to_string()
    })
}

/// `[d_in, 200 x 5, 1]`.
fn deep_dims(d_in: usize) -> Vec<usize> {
    let a = &architecture().baseline;
    let mut dims = vec![d_in];
    dims.extend(std::iter::repeat_n(a.mlp_units, a.mlp_hidden_layers));
    dims.push(1);
    dims
}

fn reject_source(source: &Batch) -> Result<()> {
    if source.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid("single-domain baseline received source rows".into()))
    }
}

/// One MLP; with `treatment_input` the treatment is appended as a last feature.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct MlpNet {
    pub store: ParamStore,
    pub mlp: Mlp,
    pub loss: HeadLoss,
    pub treatment_input: bool,
}

impl MlpNet {
    pub fn build(block: &str, d_in: usize, loss: HeadLoss, treatment_input: bool, rng: &mut Rng) -> Self {
        let mut store = ParamStore::new();
        let mlp = build_mlp(&mut store, block, None, &deep_dims(d_in + usize::from(treatment_input)), Activation::Linear, rng);
        Self {
            store,
            mlp,
            loss,
            treatment_input,
        }
    }

    fn input(&self, x: &Matrix, w: Option<&[u8]>) -> Result<Matrix> {
        match (self.treatment_input, w) {
            (false, _) => Ok(x.clone()),
            (true, Some(w)) => Matrix::hcat(x, &Matrix::column(&w.iter().map(|&v| f64::from(v)).collect::<Vec<_>>())),
            (true, None) => Err(Error::Invalid("network expects a treatment column".into())),
        }
    }

    pub fn logits(&self, x: &Matrix, w: Option<&[u8]>) -> Result<Vec<f64>> {
        Ok(self.mlp.infer(&self.store, &self.input(x, w)?)?.into_vec())
    }

    pub fn predict(&self, x: &Matrix, w: Option<&[u8]>) -> Result<Vec<f64>> {
        let head = self.loss.head();
        Ok(self.logits(x, w)?.into_iter().map(|z| head.apply(z)).collect())
    }
}

impl Objective for MlpNet {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn accumulate(&self, source: &Batch, target: &Batch, weights: LossWeights, grads: &mut GradStore) -> Result<LossParts> {
        reject_source(source)?;
        if target.is_empty() {
            return Ok(LossParts::default());
        }
        let (out, cache) = self.mlp.forward(&self.store, &self.input(&target.x, Some(&target.w))?)?;
        let lg = self.loss.eval(out.data(), target)?;
        self.mlp.backward(&self.store, &cache, &Matrix::column(&lg.grad), grads)?;
        Ok(LossParts::combine(lg.value, 0.0, 0.0, weights))
    }

    fn validation_loss(&self, val: &Batch) -> Result<f64> {
        Ok(self.loss.eval(&self.logits(&val.x, Some(&val.w))?, val)?.value)
    }
}

/// One MLP per treatment arm.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct TwoMlpNet {
    pub store: ParamStore,
    pub arms: Vec<Mlp>,
}

impl TwoMlpNet {
    pub fn build(d_in: usize, rng: &mut Rng) -> Self {
        let mut store = ParamStore::new();
        let arms = (0..2u8)
            .map(|a| build_mlp(&mut store, "mu", Some(a), &deep_dims(d_in), Activation::Linear, rng))
            .collect();
        Self { store, arms }
    }

    pub fn predict_arm(&self, x: &Matrix, arm: u8) -> Result<Vec<f64>> {
        Ok(self.arms[arm as usize].infer(&self.store, x)?.into_vec())
    }
}

impl Objective for TwoMlpNet {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn accumulate(&self, source: &Batch, target: &Batch, weights: LossWeights, grads: &mut GradStore) -> Result<LossParts> {
        reject_source(source)?;
        if target.is_empty() {
            return Ok(LossParts::default());
        }
        let mut pred = vec![0.0; target.len()];
        let mut passes = Vec::new();
        for (a, mlp) in self.arms.iter().enumerate() {
            let idx = target.arm_indices(a as u8);
            if idx.is_empty() {
                continue;
            }
            let (out, cache) = mlp.forward(&self.store, &target.x.select_rows(&idx))?;
            for (k, &i) in idx.iter().enumerate() {
                pred[i] = out.data()[k];
            }
            passes.push((a, idx, cache));
        }
        let lg = mse_loss(&pred, &target.y)?;
        for (a, idx, cache) in passes {
            let d: Vec<f64> = idx.iter().map(|&i| lg.grad[i]).collect();
            self.arms[a].backward(&self.store, &cache, &Matrix::column(&d), grads)?;
        }
        Ok(LossParts::combine(lg.value, 0.0, 0.0, weights))
    }

    fn validation_loss(&self, val: &Batch) -> Result<f64> {
        let pred = factual(&val.x, &val.w, |xa, a| self.predict_arm(xa, a))?;
        Ok(mse_loss(&pred, &val.y)?.value)
    }
}

/// Shared representation MLP followed by one head per arm.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct TarnetMlpNet {
    pub store: ParamStore,
    pub representation: Mlp,
    pub heads: Vec<Mlp>,
}

impl TarnetMlpNet {
    pub fn build(d_in: usize, rng: &mut Rng) -> Self {
        let a = &architecture().baseline;
        let mut store = ParamStore::new();
        let mut rep_dims = vec![d_in];
        rep_dims.extend(std::iter::repeat_n(a.tarnet_representation_units, a.tarnet_representation_layers));
        let representation = build_mlp(&mut store, "rep", None, &rep_dims, Activation::Relu, rng);
        let mut head_dims = vec![a.tarnet_representation_units];
        head_dims.extend(std::iter::repeat_n(a.tarnet_head_units, a.tarnet_head_layers));
        head_dims.push(1);
        let heads = (0..2u8)
            .map(|arm| build_mlp(&mut store, "head", Some(arm), &head_dims, Activation::Linear, rng))
            .collect();
        Self {
            store,
            representation,
            heads,
        }
    }

    pub fn predict_arm(&self, x: &Matrix, arm: u8) -> Result<Vec<f64>> {
        let rep = self.representation.infer(&self.store, x)?;
        Ok(self.heads[arm as usize].infer(&self.store, &rep)?.into_vec())
    }
}

impl Objective for TarnetMlpNet {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn accumulate(&self, source: &Batch, target: &Batch, weights: LossWeights, grads: &mut GradStore) -> Result<LossParts> {
        reject_source(source)?;
        if target.is_empty() {
            return Ok(LossParts::default());
        }
        let (rep, rc) = self.representation.forward(&self.store, &target.x)?;
        let mut pred = vec![0.0; target.len()];
        let mut passes = Vec::new();
        for (a, head) in self.heads.iter().enumerate() {
            let idx = target.arm_indices(a as u8);
            if idx.is_empty() {
                continue;
            }
            let (out, cache) = head.forward(&self.store, &rep.select_rows(&idx))?;
            for (k, &i) in idx.iter().enumerate() {
                pred[i] = out.data()[k];
            }
            passes.push((a, idx, cache));
        }
        let lg = mse_loss(&pred, &target.y)?;
        let mut g_rep = Matrix::zeros(rep.rows(), rep.cols());
        for (a, idx, cache) in passes {
            let d: Vec<f64> = idx.iter().map(|&i| lg.grad[i]).collect();
            let g = self.heads[a].backward(&self.store, &cache, &Matrix::column(&d), grads)?;
            g_rep.scatter_rows(&idx, &g);
        }
        self.representation.backward(&self.store, &rc, &g_rep, grads)?;
        Ok(LossParts::combine(lg.value, 0.0, 0.0, weights))
    }

    fn validation_loss(&self, val: &Batch) -> Result<f64> {
        let pred = factual(&val.x, &val.w, |xa, a| self.predict_arm(xa, a))?;
        Ok(mse_loss(&pred, &val.y)?.value)
    }
}
