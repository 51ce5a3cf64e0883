//! Transfer building blocks.
//!
//! [`EncoderTriple`] maps each domain's features to a shared and a private
//! representation; [`orth_feature_loss`] keeps the two apart. A
//! [`SharedPrivateStack`] then regresses an outcome through a shared subspace
//! updated by both domains and a private subspace per domain, with
//! [`SharedPrivateStack::orth_po_loss`] separating their weights.
//! [`ParamManifest`] persists any model's parameters.

mod encoder;
mod key;
mod manifest;
mod orth_feature;
mod propensity;
mod stack;

pub use encoder::{EncoderCache, EncoderSpec, EncoderTriple, Representation};
pub use key::ParamKey;
pub use manifest::{ManifestEntry, ParamManifest, MANIFEST_FORMAT, MANIFEST_VERSION};
pub use orth_feature::{orth_feature_grad, orth_feature_loss, OrthFeatureGrad};
pub use propensity::{PropensityBlock, PropensityCache};
pub use stack::{SharedPrivateStack, StackCache, StackLayer, StackSpec};
