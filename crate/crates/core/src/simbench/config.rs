use serde::{Deserialize, Serialize};

use super::FeaturePartition;
use crate::error::{Error, Result};

/// Law the outcome coefficients are drawn from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientLaw {
    /// `Normal(mean = a, std = b)`
    #[default]
    Normal,
    /// `Uniform(a, b)`
    Uniform,
}

fn default_noise_std() -> f64 {
    0.1
}

fn default_param_a() -> f64 {
    -10.0
}

fn default_param_b() -> f64 {
    10.0
}

/// Every knob of the semi-synthetic generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Weight of the outcome component shared across domains.
    pub alpha: f64,
    /// Within the domain-specific part, weight of the treatment-dependent private term.
    pub beta: f64,
    pub kappa_source: f64,
    pub kappa_target: f64,
    pub n_source: usize,
    pub n_target: usize,
    pub partition: FeaturePartition,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    #[serde(default = "default_param_a")]
    pub coefficient_param_a: f64,
    #[serde(default = "default_param_b")]
    pub coefficient_param_b: f64,
    #[serde(default)]
    pub coefficient_law: CoefficientLaw,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    /// Defaults used throughout the benchmark: α = β = 0.5, κ = 1 in both domains.
    pub fn new(partition: FeaturePartition, n_source: usize, n_target: usize, seed: u64) -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            kappa_source: 1.0,
            kappa_target: 1.0,
            n_source,
            n_target,
            partition,
            noise_std: default_noise_std(),
            coefficient_param_a: default_param_a(),
            coefficient_param_b: default_param_b(),
            coefficient_law: CoefficientLaw::Normal,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, name: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit(self.alpha, "alpha")?;
        unit(self.beta, "beta")?;
        for (k, name) in [(self.kappa_source, "kappa_source"), (self.kappa_target, "kappa_target")] {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be finite and >= 0, got {k}")));
            }
        }
        if self.n_target < 20 || self.n_source < 20 {
            return Err(Error::Invalid(format!(
                "each domain needs at least 20 samples for a 56/24/20 split (source {}, target {})",
                self.n_source, self.n_target
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Invalid(format!("noise_std must be >= 0, got {}", self.noise_std)));
        }
        if self.coefficient_law == CoefficientLaw::Uniform && self.coefficient_param_a >= self.coefficient_param_b {
            return Err(Error::Invalid("uniform coefficient law needs a < b".into()));
        }
        if self.coefficient_law == CoefficientLaw::Normal && self.coefficient_param_b < 0.0 {
            return Err(Error::Invalid("normal coefficient law needs a non-negative std".into()));
        }
        self.partition.validate()
    }
}
