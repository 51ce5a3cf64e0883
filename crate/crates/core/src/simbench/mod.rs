//! Semi-synthetic two-domain benchmark generator.
//!
//! Covariates (synthetic or from a CSV) are split into shared and private feature
//! blocks. Potential outcomes mix a shared component with domain-specific ones,
//! treatments follow a selection-biased propensity, and every dataset keeps the
//! noiseless ground truth needed to score CATE estimates.

mod config;
mod covariates;
mod dataset;
mod export;
mod outcomes;
mod partition;
mod simulate;

pub use config::{CoefficientLaw, SimConfig};
pub use covariates::{generate_covariates, load_covariates_csv, minmax_scale, read_covariates, CovariateSchema};
pub use dataset::{
    sample_domain_sizes, sample_source_size, split_dataset, split_sizes, Dataset, SplitDataset, FIXED_TARGET_SIZES,
};
pub use export::write_pair_csv;
pub use outcomes::{assign_treatments, outcome_mean, simulate_outcomes, CoefficientSet, PotentialOutcomes};
pub use partition::{sample_partition, FeaturePartition};
pub use simulate::{simulate, simulate_split, SimulatedPair, SplitPair};
