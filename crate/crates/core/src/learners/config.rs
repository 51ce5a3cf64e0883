use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::AdamConfig;

/// Component removed from the full HTCE objective or architecture.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    Full,
    /// Shared stack layers frozen at zero; each domain keeps only its private path.
    NoPoSharing,
    /// Drops the representation orthogonality term.
    NoOrthZ,
    /// Drops the stack-weight orthogonality term.
    NoOrthPo,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Ablation::Full, Ablation::NoPoSharing, Ablation::NoOrthZ, Ablation::NoOrthPo];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoPoSharing => "no_po_sharing",
            Ablation::NoOrthZ => "no_orth_z",
            Ablation::NoOrthPo => "no_orth_po",
        }
    }
}

/// Multipliers of the two orthogonality terms in the training objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub orth_z: f64,
    pub orth_po: f64,
}

impl LossWeights {
    /// Data loss only.
    pub const DATA_ONLY: LossWeights = LossWeights { orth_z: 0.0, orth_po: 0.0 };
}

fn default_lr() -> f64 {
    1e-4
}
fn default_batch() -> usize {
    128
}
fn default_orth() -> f64 {
    0.01
}
fn default_max_epochs() -> usize {
    1000
}
fn default_patience() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    /// Minibatch size drawn from each domain per step.
    #[serde(default = "default_batch")]
    pub batch_per_domain: usize,
    /// Applied to both orthogonality losses.
    #[serde(default = "default_orth")]
    pub orth_weight: f64,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    /// Epoch-end evaluations without target-validation improvement before stopping.
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ablation: Ablation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: default_lr(),
            batch_per_domain: default_batch(),
            orth_weight: default_orth(),
            max_epochs: default_max_epochs(),
            patience: default_patience(),
            seed: 0,
            ablation: Ablation::Full,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Invalid(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_per_domain == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Invalid("batch size, max_epochs and patience must be positive".into()));
        }
        if !(self.orth_weight >= 0.0 && self.orth_weight.is_finite()) {
            return Err(Error::Invalid(format!("orth_weight must be >= 0, got {}", self.orth_weight)));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            ..AdamConfig::default()
        }
    }

    /// Orthogonality multipliers after applying the ablation.
    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            orth_z: if self.ablation == Ablation::NoOrthZ { 0.0 } else { self.orth_weight },
            orth_po: if self.ablation == Ablation::NoOrthPo { 0.0 } else { self.orth_weight },
        }
    }
}
