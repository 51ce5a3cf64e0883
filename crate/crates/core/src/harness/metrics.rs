use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};

/// Root mean squared error between estimated and true effects.
pub fn pehe(tau_hat: &[f64], tau_true: &[f64]) -> Result<f64> {
    if tau_hat.len() != tau_true.len() {
        return shape_err("pehe", tau_true.len(), tau_hat.len());
    }
    if tau_hat.is_empty() {
        return Err(Error::Invalid("pehe of an empty sample".into()));
    }
    let sse: f64 = tau_hat.iter().zip(tau_true).map(|(a, b)| (a - b) * (a - b)).sum();
    let v = (sse / tau_hat.len() as f64).sqrt();
    if !v.is_finite() {
        return Err(Error::NonFinite("pehe".into()));
    }
    Ok(v)
}

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator) over `√n`; zero when `n < 2`.
    pub std_error: f64,
}

pub fn mean_se(values: &[f64]) -> Option<MeanSe> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Some(MeanSe { n, mean, std_error })
}
