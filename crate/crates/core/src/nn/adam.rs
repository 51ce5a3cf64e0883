//! Adam with bias-corrected moment estimates.

use serde::{Deserialize, Serialize};

use super::{GradStore, ParamStore};
use crate::error::{shape_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Single-buffer Adam update. `step` is the 1-based step index used for bias correction.
pub fn adam_update(
    param: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: u64,
    cfg: &AdamConfig,
) -> Result<()> {
    if param.len() != grad.len() || m.len() != param.len() || v.len() != param.len() {
        return shape_err("adam_update", param.len(), grad.len());
    }
    if step == 0 {
        return Err(Error::Invalid("adam step index starts at 1".into()));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("adam gradient".into()));
    }
    let bc1 = 1.0 - cfg.beta1.powi(step as i32);
    let bc2 = 1.0 - cfg.beta2.powi(step as i32);
    for i in 0..param.len() {
        let g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        param[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct Moments {
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_b: Vec<f64>,
    v_b: Vec<f64>,
}

/// Optimiser state for every layer of a [`ParamStore`].
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    moments: Vec<Moments>,
    step: u64,
}

impl AdamState {
    pub fn new(store: &ParamStore, config: AdamConfig) -> Self {
        let moments = store
            .entries()
            .iter()
            .map(|e| {
                let nw = e.layer.weights.data().len();
                let nb = e.layer.bias.len();
                Moments {
                    m_w: vec![0.0; nw],
                    v_w: vec![0.0; nw],
                    m_b: vec![0.0; nb],
                    v_b: vec![0.0; nb],
                }
            })
            .collect();
        Self {
            config,
            moments,
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update to every trainable layer.
    pub fn step(&mut self, store: &mut ParamStore, grads: &GradStore) -> Result<()> {
        if grads.len() != store.len() || self.moments.len() != store.len() {
            return shape_err("AdamState::step", store.len(), grads.len());
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("adam gradient".into()));
        }
        self.step += 1;
        let ids: Vec<_> = store.ids().collect();
        for id in ids {
            if !store.is_trainable(id) {
                continue;
            }
            let mo = &mut self.moments[id.index()];
            let layer = store.layer_mut(id);
            adam_update(
                layer.weights.data_mut(),
                grads.weights(id).data(),
                &mut mo.m_w,
                &mut mo.v_w,
                self.step,
                &self.config,
            )?;
            adam_update(
                &mut layer.bias,
                grads.bias(id),
                &mut mo.m_b,
                &mut mo.v_b,
                self.step,
                &self.config,
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let cfg = AdamConfig::default();
        let mut p = vec![0.3, -1.2];
        let mut m = vec![0.5, 0.0];
        let mut v = vec![0.0, 0.0];
        adam_update(&mut p, &[0.0, 0.0], &mut m, &mut v, 1, &cfg).unwrap();
        // m decays, the update m_hat / (sqrt(v_hat) + eps) is non-zero for the first
        // entry only because its moment was seeded
        assert_eq!(m, vec![0.45, 0.0]);
        assert_eq!(p[1], -1.2);

        let mut p = vec![0.3, -1.2];
        let mut m = vec![0.0; 2];
        let mut v = vec![0.0; 2];
        adam_update(&mut p, &[0.0, 0.0], &mut m, &mut v, 1, &cfg).unwrap();
        assert_eq!(p, vec![0.3, -1.2]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m1 = 0.1, v1 = 0.001; bias corrected both give 1, so delta = -lr / (1 + eps)
        let cfg = AdamConfig::default();
        let mut p = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        adam_update(&mut p, &[1.0], &mut m, &mut v, 1, &cfg).unwrap();
        assert!((p[0] + 1e-4 / (1.0 + 1e-8)).abs() < 1e-15);
        assert!((m[0] - 0.1).abs() < 1e-15);
        assert!((v[0] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let cfg = AdamConfig::default();
        let mut p = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        assert!(adam_update(&mut p, &[f64::NAN], &mut m, &mut v, 1, &cfg).is_err());
        assert!(adam_update(&mut p, &[1.0, 2.0], &mut m, &mut v, 1, &cfg).is_err());
    }
}
