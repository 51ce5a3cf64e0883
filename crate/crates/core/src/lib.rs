//! Heterogeneous-transfer CATE estimation.
//!
//! A source domain with plentiful data and a small target domain share only part
//! of their feature space. The learners in [`learners`] combine shared and
//! domain-private representations ([`blocks`]) to estimate treatment effects in
//! the target domain; [`simbench`] generates benchmark data with known effects and
//! [`harness`] runs and scores experiment grids.

pub mod blocks;
pub mod error;
pub mod harness;
pub mod nn;
pub mod learners;
pub mod simbench;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Which of the two datasets a sample belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Source,
    Target,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Source => "source",
            Domain::Target => "target",
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
