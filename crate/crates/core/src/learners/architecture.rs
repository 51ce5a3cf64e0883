use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw text of the embedded architecture table.
pub const ARCHITECTURE_JSON: &str = include_str!("architecture.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputActivations {
    pub continuous: String,
    pub binary: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackDepths {
    pub s: usize,
    pub t: usize,
    pub dr_outcome: usize,
    pub dr_propensity: usize,
    pub dr_pseudo_outcome: usize,
    pub tarnet: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtceArchitecture {
    pub encoder_hidden_layers: usize,
    pub encoder_units: usize,
    pub encoder_activation: String,
    pub stack_units: usize,
    pub stack_activation: String,
    pub output_activation: OutputActivations,
    pub stack_depth: StackDepths,
    pub tarnet_representation_layers: usize,
    pub tarnet_representation_units: usize,
    pub tarnet_representation_activation: String,
}

impl HtceArchitecture {
    pub fn validate(&self) -> Result<()> {
        let d = &self.stack_depth;
        let sizes = [
            ("encoder_units", self.encoder_units),
            ("stack_units", self.stack_units),
            ("tarnet_representation_layers", self.tarnet_representation_layers),
            ("tarnet_representation_units", self.tarnet_representation_units),
            ("stack_depth.s", d.s),
            ("stack_depth.t", d.t),
            ("stack_depth.dr_outcome", d.dr_outcome),
            ("stack_depth.dr_propensity", d.dr_propensity),
            ("stack_depth.dr_pseudo_outcome", d.dr_pseudo_outcome),
            ("stack_depth.tarnet", d.tarnet),
        ];
        match sizes.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(Error::Invalid(format!("architecture: {name} must be positive"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineArchitecture {
    pub mlp_hidden_layers: usize,
    pub mlp_units: usize,
    pub hidden_activation: String,
    pub tarnet_representation_layers: usize,
    pub tarnet_representation_units: usize,
    pub tarnet_head_layers: usize,
    pub tarnet_head_units: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingDefaults {
    pub optimizer: String,
    pub learning_rate: f64,
    pub batch_per_domain: usize,
    pub orth_weight: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub propensity_clip: f64,
}

/// Versioned architecture defaults used to build every learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureConstants {
    pub version: u32,
    pub htce: HtceArchitecture,
    pub baseline: BaselineArchitecture,
    pub training: TrainingDefaults,
}

pub fn architecture() -> &'static ArchitectureConstants {
    static CONSTANTS: OnceLock<ArchitectureConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| serde_json::from_str(ARCHITECTURE_JSON).expect("embedded architecture table parses"))
}
