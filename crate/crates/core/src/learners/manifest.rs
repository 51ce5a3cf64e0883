//! Versioned JSON manifest for trained models.
//!
//! A model manifest records the learner family and variant, the input layout, the
//! training configuration and one parameter manifest per separately trained
//! network. Loading rebuilds the architecture from the first three and copies the
//! weights in.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BaselineLearner, HtceArchitecture, BaselineMode, CateModel, HtceLearner, LearnerKind, TrainConfig};
use crate::blocks::ParamManifest;
use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const MODEL_FORMAT: &str = "htce-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerFamily {
    Htce,
    Baseline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentManifest {
    pub name: String,
    pub params: ParamManifest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub format: String,
    pub version: u32,
    pub family: LearnerFamily,
    pub kind: LearnerKind,
    /// Baselines only.
    pub mode: Option<BaselineMode>,
    pub d_shared: usize,
    /// HTCE only.
    pub d_source: Option<usize>,
    pub d_target: usize,
    pub config: TrainConfig,
    /// HTCE only; absent means the embedded defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<HtceArchitecture>,
    pub components: Vec<ComponentManifest>,
}

impl ModelManifest {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        family: LearnerFamily,
        kind: LearnerKind,
        mode: Option<BaselineMode>,
        d_shared: usize,
        d_source: Option<usize>,
        d_target: usize,
        config: TrainConfig,
        components: Vec<ComponentManifest>,
    ) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            family,
            kind,
            mode,
            d_shared,
            d_source,
            d_target,
            config,
            architecture: None,
            components,
        }
    }

    pub(crate) fn check(&self, family: LearnerFamily) -> Result<()> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported model manifest {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
                self.format, self.version
            )));
        }
        if self.family != family {
            return Err(Error::Invalid(format!("manifest describes a {:?} model", self.family)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Either kind of trained model, as restored from a manifest.
#[derive(Clone, Debug)]
pub enum TrainedModel {
    Htce(HtceLearner),
    Baseline(BaselineLearner),
}

impl TrainedModel {
    pub fn from_manifest(m: &ModelManifest) -> Result<Self> {
        match m.family {
            LearnerFamily::Htce => Ok(Self::Htce(HtceLearner::from_manifest(m)?)),
            LearnerFamily::Baseline => Ok(Self::Baseline(BaselineLearner::from_manifest(m)?)),
        }
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_manifest(&ModelManifest::load_json(path)?)
    }

    pub fn manifest(&self) -> Result<ModelManifest> {
        match self {
            Self::Htce(m) => m.manifest(),
            Self::Baseline(m) => m.manifest(),
        }
    }
}

impl CateModel for TrainedModel {
    fn name(&self) -> String {
        match self {
            Self::Htce(m) => m.name(),
            Self::Baseline(m) => m.name(),
        }
    }

    fn predict_cate(&self, x_target: &Matrix) -> Result<Vec<f64>> {
        match self {
            Self::Htce(m) => m.predict_cate(x_target),
            Self::Baseline(m) => m.predict_cate(x_target),
        }
    }
}
