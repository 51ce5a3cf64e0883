//! Potential-outcome simulation and biased treatment assignment.

use rand::RngExt;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::{CoefficientLaw, FeaturePartition, SimConfig};
use crate::error::{shape_err, Error, Result};
use crate::nn::{sigmoid, Matrix, Rng};
use crate::Domain;

/// Outcome coefficients, drawn once per simulation seed.
///
/// Arm-indexed vectors are `[w = 0, w = 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub v_shared: [Vec<f64>; 2],
    pub v_private_source: [Vec<f64>; 2],
    pub v_private_target: [Vec<f64>; 2],
    pub v_all_source: Vec<f64>,
    pub v_all_target: Vec<f64>,
}

enum Law {
    Normal(Normal<f64>),
    Uniform(Uniform<f64>),
}

impl Law {
    fn draw(&self, n: usize, rng: &mut Rng) -> Vec<f64> {
        match self {
            Law::Normal(d) => (0..n).map(|_| d.sample(rng)).collect(),
            Law::Uniform(d) => (0..n).map(|_| d.sample(rng)).collect(),
        }
    }
}

impl CoefficientSet {
    pub fn draw(partition: &FeaturePartition, config: &SimConfig, rng: &mut Rng) -> Result<Self> {
        let (a, b) = (config.coefficient_param_a, config.coefficient_param_b);
        let law = match config.coefficient_law {
            CoefficientLaw::Normal => {
                Law::Normal(Normal::new(a, b).map_err(|e| Error::Invalid(format!("coefficient law: {e}")))?)
            }
            CoefficientLaw::Uniform => {
                Law::Uniform(Uniform::new(a, b).map_err(|e| Error::Invalid(format!("coefficient law: {e}")))?)
            }
        };
        let (ds, dr, dt) = (partition.d_shared, partition.d_private_source, partition.d_private_target);
        Ok(Self {
            v_shared: [law.draw(ds, rng), law.draw(ds, rng)],
            v_private_source: [law.draw(dr, rng), law.draw(dr, rng)],
            v_private_target: [law.draw(dt, rng), law.draw(dt, rng)],
            v_all_source: law.draw(ds + dr, rng),
            v_all_target: law.draw(ds + dt, rng),
        })
    }

    fn private(&self, domain: Domain, arm: usize) -> &[f64] {
        match domain {
            Domain::Source => &self.v_private_source[arm],
            Domain::Target => &self.v_private_target[arm],
        }
    }

    fn all(&self, domain: Domain) -> &[f64] {
        match domain {
            Domain::Source => &self.v_all_source,
            Domain::Target => &self.v_all_target,
        }
    }
}

/// Noiseless means and noisy potential outcomes for each sample.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialOutcomes {
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
}

fn weighted_mean(v: &[f64], x: &[f64]) -> f64 {
    v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / v.len() as f64
}

/// Noiseless potential-outcome mean for one domain feature vector `[shared || private]`.
pub fn outcome_mean(x: &[f64], d_shared: usize, coeffs: &CoefficientSet, alpha: f64, beta: f64, domain: Domain, arm: usize) -> f64 {
    let shared = weighted_mean(&coeffs.v_shared[arm], &x[..d_shared]);
    let private = weighted_mean(coeffs.private(domain, arm), &x[d_shared..]);
    let all = weighted_mean(coeffs.all(domain), x);
    alpha * shared + (1.0 - alpha) * (beta * private + (1.0 - beta) * all)
}

/// Simulates both potential outcomes; one noise draw per sample is shared by both
/// arms so that `mu1 - mu0` is the exact effect.
pub fn simulate_outcomes(
    x_domain: &Matrix,
    partition: &FeaturePartition,
    coeffs: &CoefficientSet,
    config: &SimConfig,
    domain: Domain,
    rng: &mut Rng,
) -> Result<PotentialOutcomes> {
    let d = partition.d_domain(domain);
    if x_domain.cols() != d {
        return shape_err("simulate_outcomes", d, x_domain.cols());
    }
    let dp = partition.d_private(domain);
    if coeffs.v_shared[0].len() != partition.d_shared
        || coeffs.private(domain, 0).len() != dp
        || coeffs.all(domain).len() != d
    {
        return Err(Error::Invalid("coefficient dimensions do not match the partition".into()));
    }
    let noise = Normal::new(0.0, config.noise_std).map_err(|e| Error::Invalid(format!("noise: {e}")))?;
    let n = x_domain.rows();
    let mut out = PotentialOutcomes {
        mu0: Vec::with_capacity(n),
        mu1: Vec::with_capacity(n),
        y0: Vec::with_capacity(n),
        y1: Vec::with_capacity(n),
    };
    for r in 0..n {
        let x = x_domain.row(r);
        let m0 = outcome_mean(x, partition.d_shared, coeffs, config.alpha, config.beta, domain, 0);
        let m1 = outcome_mean(x, partition.d_shared, coeffs, config.alpha, config.beta, domain, 1);
        let eps = if config.noise_std > 0.0 { noise.sample(rng) } else { 0.0 };
        out.mu0.push(m0);
        out.mu1.push(m1);
        out.y0.push(m0 + eps);
        out.y1.push(m1 + eps);
    }
    Ok(out)
}

/// Largest `f64` below 1.
const PI_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// `π = sigmoid(κ (μ1 − μ0))`, `W ~ Bernoulli(π)`.
///
/// `π` is kept strictly inside `(0, 1)` where the sigmoid saturates in floating point.
pub fn assign_treatments(mu0: &[f64], mu1: &[f64], kappa: f64, rng: &mut Rng) -> Result<(Vec<u8>, Vec<f64>)> {
    if mu0.len() != mu1.len() {
        return shape_err("assign_treatments", mu0.len(), mu1.len());
    }
    let pi: Vec<f64> = mu0
        .iter()
        .zip(mu1)
        .map(|(a, b)| sigmoid(kappa * (b - a)).clamp(f64::MIN_POSITIVE, PI_MAX))
        .collect();
    let w = pi.iter().map(|&p| u8::from(rng.random::<f64>() < p)).collect();
    Ok((w, pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::rng_from_seed;

    fn tiny_partition() -> FeaturePartition {
        FeaturePartition::contiguous(1, 1, 1).unwrap()
    }

    #[test]
    fn saturated_propensities_stay_inside_the_unit_interval() {
        let (w, pi) = assign_treatments(&[0.0, 0.0], &[100.0, -100.0], 10.0, &mut rng_from_seed(1)).unwrap();
        assert!(pi[0] < 1.0 && pi[1] > 0.0);
        assert_eq!(w, vec![1, 0]);
    }

    #[test]
    fn hand_evaluated_outcome_mean() {
        let coeffs = CoefficientSet {
            v_shared: [vec![0.0], vec![2.0]],
            v_private_source: [vec![0.0], vec![4.0]],
            v_private_target: [vec![0.0], vec![0.0]],
            v_all_source: vec![1.0, 1.0],
            v_all_target: vec![0.0, 0.0],
        };
        let m = outcome_mean(&[1.0, 1.0], 1, &coeffs, 0.5, 0.5, Domain::Source, 1);
        assert!((m - 2.25).abs() < 1e-12);
    }

    #[test]
    fn shared_only_equal_coefficients_give_zero_effect() {
        let p = FeaturePartition::contiguous(2, 1, 1).unwrap();
        let coeffs = CoefficientSet {
            v_shared: [vec![1.0, 1.0], vec![1.0, 1.0]],
            v_private_source: [vec![5.0], vec![-3.0]],
            v_private_target: [vec![2.0], vec![7.0]],
            v_all_source: vec![1.0; 3],
            v_all_target: vec![1.0; 3],
        };
        let mut cfg = SimConfig::new(p.clone(), 100, 100, 0);
        cfg.alpha = 1.0;
        cfg.noise_std = 0.0;
        let x = Matrix::from_rows(&[[1.0, 1.0, 0.3]]).unwrap();
        let po = simulate_outcomes(&x, &p, &coeffs, &cfg, Domain::Target, &mut rng_from_seed(0)).unwrap();
        assert_eq!(po.mu0, vec![1.0]);
        assert_eq!(po.mu1, vec![1.0]);
    }

    #[test]
    fn wrong_width_is_rejected() {
        let p = tiny_partition();
        let cfg = SimConfig::new(p.clone(), 100, 100, 0);
        let coeffs = CoefficientSet::draw(&p, &cfg, &mut rng_from_seed(0)).unwrap();
        let x = Matrix::zeros(3, 3);
        assert!(simulate_outcomes(&x, &p, &coeffs, &cfg, Domain::Source, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn propensity_examples() {
        let (_, pi) = assign_treatments(&[0.0, 3.0], &[5.0, -1.0], 0.0, &mut rng_from_seed(1)).unwrap();
        assert_eq!(pi, vec![0.5, 0.5]);
        let (_, pi) = assign_treatments(&[0.0], &[1.0], 2.0, &mut rng_from_seed(1)).unwrap();
        assert!((pi[0] - 0.8808).abs() < 1e-4);
        assert!(assign_treatments(&[0.0], &[1.0, 2.0], 1.0, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn uniform_law_stays_in_range() {
        let p = FeaturePartition::contiguous(3, 3, 3).unwrap();
        let mut cfg = SimConfig::new(p.clone(), 100, 100, 0);
        cfg.coefficient_law = CoefficientLaw::Uniform;
        let c = CoefficientSet::draw(&p, &cfg, &mut rng_from_seed(2)).unwrap();
        assert!(c.v_all_source.iter().all(|v| (-10.0..10.0).contains(v)));
    }
}
