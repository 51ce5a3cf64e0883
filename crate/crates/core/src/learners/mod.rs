//! CATE learners.
//!
//! [`HtceLearner`] trains on a source and a target domain at once through shared
//! and private subspaces; [`BaselineLearner`] trains an ordinary single-domain
//! network on the target data. Both come in S, T, DR and TARNet variants and
//! estimate `τ̂(x) = μ̂₁(x) − μ̂₀(x)` on target rows.

mod architecture;
mod baseline;
mod baseline_nets;
mod batch;
mod config;
mod dr;
mod htce;
mod manifest;
mod nets;
mod train;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use architecture::{
    architecture, ArchitectureConstants, BaselineArchitecture, HtceArchitecture, OutputActivations, StackDepths,
    TrainingDefaults, ARCHITECTURE_JSON,
};
pub use baseline::{train_baseline, BaselineLearner, BaselineMode};
pub use batch::Batch;
pub use config::{Ablation, LossWeights, TrainConfig};
pub use dr::{dr_pseudo_outcome, dr_pseudo_outcomes, PROPENSITY_CLIP};
pub use htce::{
    train_htce, train_htce_dr, train_htce_dr_oracle, train_htce_s, train_htce_t, train_htce_tarnet, train_htce_with,
    HtceLearner, Nuisance, OUTCOME, PROPENSITY, PSEUDO_OUTCOME,
};
pub use manifest::{ComponentManifest, LearnerFamily, ModelManifest, TrainedModel, MODEL_FORMAT, MODEL_VERSION};
pub use nets::HeadLoss;
pub use train::{EpochRecord, LossParts, TrainingHistory};

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Meta-learner variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    S,
    T,
    Dr,
    Tarnet,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] = [LearnerKind::S, LearnerKind::T, LearnerKind::Dr, LearnerKind::Tarnet];

    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::S => "s",
            LearnerKind::T => "t",
            LearnerKind::Dr => "dr",
            LearnerKind::Tarnet => "tarnet",
        }
    }
}

impl std::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(LearnerKind::S),
            "t" => Ok(LearnerKind::T),
            "dr" => Ok(LearnerKind::Dr),
            "tarnet" => Ok(LearnerKind::Tarnet),
            other => Err(Error::Invalid(format!("unknown learner `{other}` (expected s, t, dr or tarnet)"))),
        }
    }
}

/// A trained model that estimates effects on target-layout rows.
pub trait CateModel {
    fn name(&self) -> String;
    /// `τ̂` for each row of `x_target`, whose columns follow the target layout.
    fn predict_cate(&self, x_target: &Matrix) -> Result<Vec<f64>>;
}

/// Free-function form of [`CateModel::predict_cate`].
pub fn predict_cate(model: &dyn CateModel, x_target: &Matrix) -> Result<Vec<f64>> {
    model.predict_cate(x_target)
}
