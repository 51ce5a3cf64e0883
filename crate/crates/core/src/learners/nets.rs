//! Two-domain HTCE networks and their training objectives.

use serde::{Deserialize, Serialize};

use super::architecture::HtceArchitecture;
use super::train::{LossParts, Objective};
use super::{Ablation, Batch, LossWeights};
use crate::blocks::{EncoderSpec, EncoderTriple, ParamKey, Representation, SharedPrivateStack, StackSpec};
use crate::error::Result;
use crate::nn::{
    bce_with_logits_loss, frobenius_orth_grad, mse_loss, Activation, GradStore, LossGrad, Matrix, Mlp, OrthPenalty,
    ParamStore, Rng,
};
use crate::Domain;

/// Loss applied to a head's pre-activation output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadLoss {
    /// Squared error against `batch.y` with a linear head.
    Mse,
    /// Cross-entropy against `batch.w` with a sigmoid head.
    Bce,
}

impl HeadLoss {
    pub(crate) fn head(self) -> Activation {
        match self {
            HeadLoss::Mse => Activation::Linear,
            HeadLoss::Bce => Activation::Sigmoid,
        }
    }

    pub(crate) fn eval(self, logits: &[f64], batch: &Batch) -> Result<LossGrad> {
        match self {
            HeadLoss::Mse => mse_loss(logits, &batch.y),
            HeadLoss::Bce => bce_with_logits_loss(logits, &batch.w_f64()),
        }
    }
}

/// Penalty on one domain's representations, skipped when unweighted.
fn orth_z(repr: &Representation, weight: f64) -> Result<OrthPenalty> {
    if weight == 0.0 {
        let value = crate::nn::frobenius_orth(&repr.z_shared, &repr.z_private)?;
        return Ok(OrthPenalty {
            value,
            grad_a: Matrix::zeros(repr.z_shared.rows(), repr.z_shared.cols()),
            grad_b: Matrix::zeros(repr.z_private.rows(), repr.z_private.cols()),
        });
    }
    frobenius_orth_grad(&repr.z_shared, &repr.z_private)
}

fn orth_po(stacks: &[&SharedPrivateStack], store: &ParamStore, weight: f64, grads: &mut GradStore) -> Result<f64> {
    let mut total = 0.0;
    for s in stacks {
        total += if weight == 0.0 {
            s.orth_po_loss(store)?
        } else {
            s.orth_po_backward(store, weight, grads)?
        };
    }
    Ok(total)
}

/// Combines encoder-side gradients from the stack and the representation penalty.
fn encoder_grads(g_phi: &Matrix, width_shared: usize, pen: &OrthPenalty, rows: std::ops::Range<usize>, weight: f64) -> Result<(Matrix, Matrix)> {
    let (mut gs, mut gp) = g_phi.split_cols(width_shared)?;
    if weight != 0.0 {
        gs.add_scaled(&pen.grad_a.row_range(rows.start, rows.end), weight)?;
        gp.add_scaled(&pen.grad_b.row_range(rows.start, rows.end), weight)?;
    }
    Ok((gs, gp))
}

fn stack_spec(input_dim: usize, depth: usize, width: usize, head: Activation) -> StackSpec {
    let mut spec = StackSpec::new(input_dim, depth, head);
    spec.width = width;
    spec
}

/// One encoder triple and one stack; used for the S-learner, propensity and
/// pseudo-outcome regressors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct SingleStackNet {
    pub store: ParamStore,
    pub encoder: EncoderTriple,
    pub stack: SharedPrivateStack,
    pub loss: HeadLoss,
}

impl SingleStackNet {
    pub fn build(
        block: &str,
        enc: EncoderSpec,
        depth: usize,
        width: usize,
        loss: HeadLoss,
        ablation: Ablation,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut store = ParamStore::new();
        let encoder = EncoderTriple::build(&mut store, &format!("{block}_enc"), None, enc, rng)?;
        let spec = stack_spec(enc.output_width(), depth, width, loss.head());
        let stack = SharedPrivateStack::build(&mut store, block, None, spec, rng)?;
        if ablation == Ablation::NoPoSharing {
            stack.freeze_shared(&mut store);
        }
        Ok(Self { store, encoder, stack, loss })
    }

    fn treatment(&self, w: &[u8]) -> Option<Vec<f64>> {
        self.encoder
            .spec()
            .treatment_input
            .then(|| w.iter().map(|&v| f64::from(v)).collect())
    }

    fn domain_terms(&self, batch: &Batch, domain: Domain, weights: LossWeights, grads: &mut GradStore) -> Result<(f64, f64)> {
        if batch.is_empty() {
            return Ok((0.0, 0.0));
        }
        let t = self.treatment(&batch.w);
        let (repr, ec) = self.encoder.encode(&self.store, &batch.x, domain, t.as_deref())?;
        let (logits, sc) = self.stack.forward(&self.store, &repr.concat(), domain)?;
        let lg = self.loss.eval(logits.data(), batch)?;
        let pen = orth_z(&repr, weights.orth_z)?;
        let g_phi = self.stack.backward(&self.store, &sc, &Matrix::column(&lg.grad), grads)?;
        let (gs, gp) = encoder_grads(&g_phi, self.encoder.spec().width_shared, &pen, 0..batch.len(), weights.orth_z)?;
        self.encoder.backward(&self.store, &ec, &gs, &gp, grads)?;
        Ok((lg.value, pen.value))
    }

    /// Head pre-activations; `w` is required iff the encoder takes a treatment column.
    pub fn logits(&self, x: &Matrix, domain: Domain, w: Option<&[u8]>) -> Result<Vec<f64>> {
        let t = w.and_then(|w| self.treatment(w));
        let repr = self.encoder.infer(&self.store, x, domain, t.as_deref())?;
        Ok(self.stack.infer_logits(&self.store, &repr.concat(), domain)?.into_vec())
    }

    pub fn predict(&self, x: &Matrix, domain: Domain, w: Option<&[u8]>) -> Result<Vec<f64>> {
        let head = self.loss.head();
        Ok(self.logits(x, domain, w)?.into_iter().map(|z| head.apply(z)).collect())
    }
}

impl Objective for SingleStackNet {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn accumulate(&self, source: &Batch, target: &Batch, weights: LossWeights, grads: &mut GradStore) -> Result<LossParts> {
        let (dr, zr) = self.domain_terms(source, Domain::Source, weights, grads)?;
        let (dt, zt) = self.domain_terms(target, Domain::Target, weights, grads)?;
        let po = orth_po(&[&self.stack], &self.store, weights.orth_po, grads)?;
        Ok(LossParts::combine(dr + dt, zr + zt, po, weights))
    }

    fn validation_loss(&self, val: &Batch) -> Result<f64> {
        let logits = self.logits(&val.x, Domain::Target, Some(&val.w))?;
        Ok(self.loss.eval(&logits, val)?.value)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct ArmNet {
    pub encoder: EncoderTriple,
    pub stack: SharedPrivateStack,
}

/// Separate encoder triple and stack per treatment arm (HTCE-T, DR outcome stage).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct TwoArmNet {
    pub store: ParamStore,
    pub arms: Vec<ArmNet>,
}

/// Per-arm forward state for one domain batch.
struct ArmPass<C> {
    idx: Vec<usize>,
    cache: C,
}

impl TwoArmNet {
    pub fn build(enc: EncoderSpec, depth: usize, width: usize, ablation: Ablation, rng: &mut Rng) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut arms = Vec::with_capacity(2);
        for a in 0..2u8 {
            let encoder = EncoderTriple::build(&mut store, "enc", Some(a), enc, rng)?;
            let stack = SharedPrivateStack::build(
                &mut store,
                "po",
                Some(a),
                stack_spec(enc.output_width(), depth, width, Activation::Linear),
                rng,
            )?;
            if ablation == Ablation::NoPoSharing {
                stack.freeze_shared(&mut store);
            }
            arms.push(ArmNet { encoder, stack });
        }
        Ok(Self { store, arms })
    }

    fn domain_terms(&self, batch: &Batch, domain: Domain, weights: LossWeights, grads: &mut GradStore) -> Result<(f64, f64)> {
        if batch.is_empty() {
            return Ok((0.0, 0.0));
        }
        let mut pred = vec![0.0; batch.len()];
        let mut passes = Vec::with_capacity(2);
        let mut zs = Vec::new();
        let mut zp = Vec::new();
        for (a, arm) in self.arms.iter().enumerate() {
            let idx = batch.arm_indices(a as u8);
            if idx.is_empty() {
                continue;
            }
            let (repr, ec) = arm.encoder.encode(&self.store, &batch.x.select_rows(&idx), domain, None)?;
            let (logits, sc) = arm.stack.forward(&self.store, &repr.concat(), domain)?;
            for (k, &i) in idx.iter().enumerate() {
                pred[i] = logits.data()[k];
            }
            zs.push(repr.z_shared);
            zp.push(repr.z_private);
            passes.push((a, ArmPass { idx, cache: (ec, sc) }));
        }
        let lg = mse_loss(&pred, &batch.y)?;
        // The representation penalty is taken over the whole domain batch, stacking
        // rows produced by both arms' encoders.
        let stacked = Representation {
            z_shared: Matrix::vcat(&zs.iter().collect::<Vec<_>>())?,
            z_private: Matrix::vcat(&zp.iter().collect::<Vec<_>>())?,
        };
        let pen = orth_z(&stacked, weights.orth_z)?;
        let mut offset = 0;
        for (a, pass) in passes {
            let arm = &self.arms[a];
            let (ec, sc) = &pass.cache;
            let d: Vec<f64> = pass.idx.iter().map(|&i| lg.grad[i]).collect();
            let g_phi = arm.stack.backward(&self.store, sc, &Matrix::column(&d), grads)?;
            let rows = offset..offset + pass.idx.len();
            offset = rows.end;
            let (gs, gp) = encoder_grads(&g_phi, arm.encoder.spec().width_shared, &pen, rows, weights.orth_z)?;
            arm.encoder.backward(&self.store, ec, &gs, &gp, grads)?;
        }
        Ok((lg.value, pen.value))
    }

    /// `μ̂_arm(x)` in the given domain.
    pub fn predict_arm(&self, x: &Matrix, domain: Domain, arm: u8) -> Result<Vec<f64>> {
        let net = &self.arms[arm as usize];
        let repr = net.encoder.infer(&self.store, x, domain, None)?;
        Ok(net.stack.infer_logits(&self.store, &repr.concat(), domain)?.into_vec())
    }

    pub fn predict_factual(&self, x: &Matrix, w: &[u8], domain: Domain) -> Result<Vec<f64>> {
        factual(x, w, |xa, a| self.predict_arm(xa, domain, a))
    }
}

/// Routes rows to their own arm's predictor.
pub(crate) fn factual(x: &Matrix, w: &[u8], mut f: impl FnMut(&Matrix, u8) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.rows()];
    for a in 0..2u8 {
        let idx: Vec<usize> = (0..w.len()).filter(|&i| w[i] == a).collect();
        if idx.is_empty() {
            continue;
        }
        for (k, v) in f(&x.select_rows(&idx), a)?.into_iter().enumerate() {
            out[idx[k]] = v;
        }
    }
    Ok(out)
}

impl Objective for TwoArmNet {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn accumulate(&self, source: &Batch, target: &Batch, weights: LossWeights, grads: &mut GradStore) -> Result<LossParts> {
        let (dr, zr) = self.domain_terms(source, Domain::Source, weights, grads)?;
        let (dt, zt) = self.domain_terms(target, Domain::Target, weights, grads)?;
        let stacks: Vec<&SharedPrivateStack> = self.arms.iter().map(|a| &a.stack).collect();
        let po = orth_po(&stacks, &self.store, weights.orth_po, grads)?;
        Ok(LossParts::combine(dr + dt, zr + zt, po, weights))
    }

    fn validation_loss(&self, val: &Batch) -> Result<f64> {
        let pred = self.predict_factual(&val.x, &val.w, Domain::Target)?;
        Ok(mse_loss(&pred, &val.y)?.value)
    }
}

/// Arm-shared encoders, a representation tower per domain and per-arm stacks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct TarnetNet {
    pub store: ParamStore,
    pub encoder: EncoderTriple,
    /// `[Ω^{p_R}, Ω^{p_T}]`
    pub towers: Vec<Mlp>,
    pub stacks: Vec<SharedPrivateStack>,
}

impl TarnetNet {
    pub fn build(enc: EncoderSpec, arch: &HtceArchitecture, ablation: Ablation, rng: &mut Rng) -> Result<Self> {
        let mut store = ParamStore::new();
        let encoder = EncoderTriple::build(&mut store, "enc", None, enc, rng)?;
        let mut dims = vec![enc.output_width()];
        dims.extend(std::iter::repeat_n(arch.tarnet_representation_units, arch.tarnet_representation_layers));
        let towers = ["private_source", "private_target"]
            .iter()
            .map(|sub| {
                Mlp::build_keyed(&mut store, &dims, Activation::Relu, Activation::Relu, rng, |l| {
                    ParamKey::new("omega", None, l, sub).to_string()
                })
            })
            .collect();
        let mut stacks = Vec::with_capacity(2);
        for a in 0..2u8 {
            let spec = stack_spec(
                arch.tarnet_representation_units,
                arch.stack_depth.tarnet,
                arch.stack_units,
                Activation::Linear,
            );
            let s = SharedPrivateStack::build(&mut store, "po", Some(a), spec, rng)?;
            if ablation == Ablation::NoPoSharing {
                s.freeze_shared(&mut store);
            }
            stacks.push(s);
        }
        Ok(Self {
            store,
            encoder,
            towers,
            stacks,
        })
    }

    fn tower(&self, domain: Domain) -> &Mlp {
        match domain {
            Domain::Source => &self.towers[0],
            Domain::Target => &self.towers[1],
        }
    }

    fn domain_terms(&self, batch: &Batch, domain: Domain, weights: LossWeights, grads: &mut GradStore) -> Result<(f64, f64)> {
        if batch.is_empty() {
            return Ok((0.0, 0.0));
        }
        let (repr, ec) = self.encoder.encode(&self.store, &batch.x, domain, None)?;
        let pen = orth_z(&repr, weights.orth_z)?;
        let tower = self.tower(domain);
        let (rep, tc) = tower.forward(&self.store, &repr.concat())?;
        let mut pred = vec![0.0; batch.len()];
        let mut passes = Vec::with_capacity(2);
        for (a, stack) in self.stacks.iter().enumerate() {
            let idx = batch.arm_indices(a as u8);
            if idx.is_empty() {
                continue;
            }
            let (logits, sc) = stack.forward(&self.store, &rep.select_rows(&idx), domain)?;
            for (k, &i) in idx.iter().enumerate() {
                pred[i] = logits.data()[k];
            }
            passes.push((a, ArmPass { idx, cache: sc }));
        }
        let lg = mse_loss(&pred, &batch.y)?;
        let mut g_rep = Matrix::zeros(rep.rows(), rep.cols());
        for (a, pass) in passes {
            let d: Vec<f64> = pass.idx.iter().map(|&i| lg.grad[i]).collect();
            let g = self.stacks[a].backward(&self.store, &pass.cache, &Matrix::column(&d), grads)?;
            g_rep.scatter_rows(&pass.idx, &g);
        }
        let g_phi = tower.backward(&self.store, &tc, &g_rep, grads)?;
        let (gs, gp) = encoder_grads(&g_phi, self.encoder.spec().width_shared, &pen, 0..batch.len(), weights.orth_z)?;
        self.encoder.backward(&self.store, &ec, &gs, &gp, grads)?;
        Ok((lg.value, pen.value))
    }

    pub fn predict_arm(&self, x: &Matrix, domain: Domain, arm: u8) -> Result<Vec<f64>> {
        let repr = self.encoder.infer(&self.store, x, domain, None)?;
        let rep = self.tower(domain).infer(&self.store, &repr.concat())?;
        Ok(self.stacks[arm as usize].infer_logits(&self.store, &rep, domain)?.into_vec())
    }
}

impl Objective for TarnetNet {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn accumulate(&self, source: &Batch, target: &Batch, weights: LossWeights, grads: &mut GradStore) -> Result<LossParts> {
        let (dr, zr) = self.domain_terms(source, Domain::Source, weights, grads)?;
        let (dt, zt) = self.domain_terms(target, Domain::Target, weights, grads)?;
        let stacks: Vec<&SharedPrivateStack> = self.stacks.iter().collect();
        let po = orth_po(&stacks, &self.store, weights.orth_po, grads)?;
        Ok(LossParts::combine(dr + dt, zr + zt, po, weights))
    }

    fn validation_loss(&self, val: &Batch) -> Result<f64> {
        let pred = factual(&val.x, &val.w, |xa, a| self.predict_arm(xa, Domain::Target, a))?;
        Ok(mse_loss(&pred, &val.y)?.value)
    }
}
