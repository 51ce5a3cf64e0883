use serde::{Deserialize, Serialize};

use super::batch::paired_epoch;
use super::{Batch, LossWeights, TrainConfig};
use crate::error::{Error, Result};
use crate::nn::{AdamState, GradStore, ParamStore, Rng};

/// Components of one evaluation of the training objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    /// Source plus target data loss.
    pub data: f64,
    /// Unweighted representation orthogonality term.
    pub orth_z: f64,
    /// Unweighted stack-weight orthogonality term.
    pub orth_po: f64,
    /// `data + w_z * orth_z + w_po * orth_po`.
    pub total: f64,
}

impl LossParts {
    pub(crate) fn combine(data: f64, orth_z: f64, orth_po: f64, w: LossWeights) -> Self {
        Self {
            data,
            orth_z,
            orth_po,
            total: data + w.orth_z * orth_z + w.orth_po * orth_po,
        }
    }
}

/// A network with its own parameter store and a differentiable objective.
pub(crate) trait Objective {
    fn store(&self) -> &ParamStore;
    fn store_mut(&mut self) -> &mut ParamStore;
    /// Adds the gradient of the weighted objective on one paired minibatch into
    /// `grads`. Either batch may be empty.
    fn accumulate(&self, source: &Batch, target: &Batch, weights: LossWeights, grads: &mut GradStore) -> Result<LossParts>;
    /// Early-stopping criterion on the target validation split.
    fn validation_loss(&self, target_val: &Batch) -> Result<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean objective over the epoch's steps.
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were restored.
    pub best_epoch: usize,
    pub best_validation_loss: f64,
}

/// Adam with paired minibatches and early stopping on target validation loss.
///
/// After training the parameters of the epoch with the lowest validation loss are
/// restored.
pub(crate) fn fit<O: Objective>(
    model: &mut O,
    source: &Batch,
    target: &Batch,
    target_val: &Batch,
    cfg: &TrainConfig,
    weights: LossWeights,
    rng: &mut Rng,
) -> Result<TrainingHistory> {
    cfg.validate()?;
    if target.is_empty() || target_val.is_empty() {
        return Err(Error::Invalid("target training and validation splits must be nonempty".into()));
    }
    let mut adam = AdamState::new(model.store(), cfg.adam());
    let mut grads = GradStore::zeros_like(model.store());
    let mut history = TrainingHistory {
        best_validation_loss: f64::INFINITY,
        ..Default::default()
    };
    let mut best: Option<ParamStore> = None;
    let mut since_best = 0;
    for epoch in 1..=cfg.max_epochs {
        let steps = paired_epoch(source.len(), target.len(), cfg.batch_per_domain, rng);
        let mut sum = 0.0;
        for (si, ti) in &steps {
            grads.clear();
            let parts = model.accumulate(&source.subset(si), &target.subset(ti), weights, &mut grads)?;
            if !parts.total.is_finite() || !grads.is_finite() {
                return Err(Error::Diverged(format!("non-finite training loss at epoch {epoch}")));
            }
            sum += parts.total;
            adam.step(model.store_mut(), &grads)?;
        }
        let val = model.validation_loss(target_val)?;
        if !val.is_finite() {
            return Err(Error::Diverged(format!("non-finite validation loss at epoch {epoch}")));
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: sum / steps.len() as f64,
            validation_loss: val,
        });
        if val < history.best_validation_loss {
            history.best_validation_loss = val;
            history.best_epoch = epoch;
            best = Some(model.store().clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    if let Some(b) = best {
        model.store_mut().copy_values_from(&b)?;
    }
    Ok(history)
}
