//! Mean-reduced regression and classification losses with their gradients.

use super::activation::sigmoid;
use crate::error::{shape_err, Error, Result};

/// Loss value and `dL/d(pred)` per element.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGrad {
    pub value: f64,
    pub grad: Vec<f64>,
}

fn check_lengths(op: &'static str, pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.len() != target.len() {
        return shape_err(op, pred.len(), target.len());
    }
    if pred.is_empty() {
        return Err(Error::Invalid(format!("{op}: empty input")));
    }
    Ok(())
}

pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<LossGrad> {
    check_lengths("mse_loss", pred, target)?;
    let n = pred.len() as f64;
    let mut value = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            value += d * d;
            2.0 * d / n
        })
        .collect();
    Ok(LossGrad {
        value: value / n,
        grad,
    })
}

fn check_labels(target: &[f64]) -> Result<()> {
    if target.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::Invalid("binary cross-entropy labels must be 0 or 1".into()));
    }
    Ok(())
}

/// Binary cross-entropy on probabilities strictly inside `(0, 1)`.
pub fn bce_loss(pred: &[f64], target: &[f64]) -> Result<LossGrad> {
    check_lengths("bce_loss", pred, target)?;
    check_labels(target)?;
    if let Some(p) = pred.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Invalid(format!("bce prediction {p} outside (0, 1)")));
    }
    let n = pred.len() as f64;
    let mut value = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            value -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
            (p - t) / (p * (1.0 - p) * n)
        })
        .collect();
    Ok(LossGrad {
        value: value / n,
        grad,
    })
}

/// Binary cross-entropy of `sigmoid(logits)`, differentiated with respect to the
/// logits. Stable where the sigmoid saturates.
pub fn bce_with_logits_loss(logits: &[f64], target: &[f64]) -> Result<LossGrad> {
    check_lengths("bce_with_logits_loss", logits, target)?;
    check_labels(target)?;
    let n = logits.len() as f64;
    let mut value = 0.0;
    let grad = logits
        .iter()
        .zip(target)
        .map(|(&z, &t)| {
            // log(1 + e^z) - t z, written to avoid overflow
            value += z.max(0.0) - z * t + (-z.abs()).exp().ln_1p();
            (sigmoid(z) - t) / n
        })
        .collect();
    Ok(LossGrad {
        value: value / n,
        grad,
    })
}
