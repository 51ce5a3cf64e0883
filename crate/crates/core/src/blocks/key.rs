use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structured parameter address `block/arm/layer/subspace`.
///
/// `arm` is `None` for blocks shared by both treatment arms and is written as `all`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamKey {
    pub block: String,
    pub arm: Option<u8>,
    /// 1-based layer index within the block.
    pub layer: usize,
    pub subspace: String,
}

impl ParamKey {
    pub fn new(block: &str, arm: Option<u8>, layer: usize, subspace: &str) -> Self {
        Self {
            block: block.to_string(),
            arm,
            layer,
            subspace: subspace.to_string(),
        }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.arm {
            Some(a) => write!(f, "{}/arm{}/l{}/{}", self.block, a, self.layer, self.subspace),
            None => write!(f, "{}/all/l{}/{}", self.block, self.layer, self.subspace),
        }
    }
}

impl FromStr for ParamKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("malformed parameter key `{s}`"));
        let parts: Vec<&str> = s.split('/').collect();
        let [block, arm, layer, subspace] = parts[..] else {
            return Err(bad());
        };
        let arm = match arm {
            "all" => None,
            a => Some(a.strip_prefix("arm").and_then(|v| v.parse().ok()).ok_or_else(bad)?),
        };
        let layer = layer
            .strip_prefix('l')
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)?;
        if block.is_empty() || subspace.is_empty() {
            return Err(bad());
        }
        Ok(Self::new(block, arm, layer, subspace))
    }
}
