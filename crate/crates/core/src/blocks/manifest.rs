//! Version-tagged JSON parameter manifest.
//!
//! ```text
//! {
//!   "format": "htce-params",
//!   "version": 1,
//!   "entries": [
//!     { "block": "po", "arm": 0, "layer": 1, "subspace": "shared",
//!       "activation": "selu", "trainable": true,
//!       "rows": 200, "cols": 100,
//!       "weights": [ ... rows*cols values, row-major (input-major) ... ],
//!       "bias": [ ... cols values ... ] }
//!   ]
//! }
//! ```
//!
//! `arm` is `null` for blocks shared across treatment arms. Entries appear in the
//! order the model created them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ParamKey;
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Matrix, ParamStore};

pub const MANIFEST_FORMAT: &str = "htce-params";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub key: ParamKey,
    pub activation: Activation,
    pub trainable: bool,
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamManifest {
    pub format: String,
    pub version: u32,
    pub entries: Vec<ManifestEntry>,
}

impl ParamManifest {
    pub fn from_store(store: &ParamStore) -> Result<Self> {
        let entries = store
            .entries()
            .iter()
            .map(|e| {
                Ok(ManifestEntry {
                    key: e.key.parse()?,
                    activation: e.layer.activation,
                    trainable: e.trainable,
                    rows: e.layer.weights.rows(),
                    cols: e.layer.weights.cols(),
                    weights: e.layer.weights.data().to_vec(),
                    bias: e.layer.bias.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            entries,
        })
    }

    fn check_header(&self) -> Result<()> {
        if self.format != MANIFEST_FORMAT || self.version != MANIFEST_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported manifest {} v{} (expected {MANIFEST_FORMAT} v{MANIFEST_VERSION})",
                self.format, self.version
            )));
        }
        Ok(())
    }

    /// Rebuilds a store with the manifest's layout and values.
    pub fn to_store(&self) -> Result<ParamStore> {
        self.check_header()?;
        let mut store = ParamStore::new();
        for e in &self.entries {
            let w = Matrix::from_vec(e.rows, e.cols, e.weights.clone())?;
            let layer = DenseLayer::new(w, e.bias.clone(), e.activation)?;
            let id = store.add(e.key.to_string(), layer);
            if !e.trainable {
                store.set_trainable(id, false);
            }
        }
        Ok(store)
    }

    /// Overwrites `store`'s values, requiring an identical layout.
    pub fn load_into(&self, store: &mut ParamStore) -> Result<()> {
        let loaded = self.to_store()?;
        store.copy_values_from(&loaded)?;
        for id in loaded.ids() {
            store.set_trainable(id, loaded.is_trainable(id));
        }
        Ok(())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let m: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        m.check_header()?;
        Ok(m)
    }
}
