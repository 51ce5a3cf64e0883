use rand::seq::SliceRandom;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Rng;
use crate::Domain;

/// Assignment of the full feature set's columns to shared and private blocks.
///
/// A domain's feature vector is laid out as `[shared columns || private columns]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturePartition {
    pub d_shared: usize,
    pub d_private_source: usize,
    pub d_private_target: usize,
    pub shared_columns: Vec<usize>,
    pub private_source_columns: Vec<usize>,
    pub private_target_columns: Vec<usize>,
}

fn overlaps(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.contains(x))
}

fn has_duplicates(a: &[usize]) -> bool {
    let mut s = a.to_vec();
    s.sort_unstable();
    s.windows(2).any(|w| w[0] == w[1])
}

impl FeaturePartition {
    pub fn new(shared: Vec<usize>, private_source: Vec<usize>, private_target: Vec<usize>) -> Result<Self> {
        let p = Self {
            d_shared: shared.len(),
            d_private_source: private_source.len(),
            d_private_target: private_target.len(),
            shared_columns: shared,
            private_source_columns: private_source,
            private_target_columns: private_target,
        };
        p.validate()?;
        Ok(p)
    }

    /// Contiguous layout over `d_shared + d_private_source + d_private_target` columns.
    pub fn contiguous(d_shared: usize, d_private_source: usize, d_private_target: usize) -> Result<Self> {
        let s = (0..d_shared).collect();
        let r = (d_shared..d_shared + d_private_source).collect();
        let t = (d_shared + d_private_source..d_shared + d_private_source + d_private_target).collect();
        Self::new(s, r, t)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            (self.d_shared, self.shared_columns.len(), "shared"),
            (self.d_private_source, self.private_source_columns.len(), "private_source"),
            (self.d_private_target, self.private_target_columns.len(), "private_target"),
        ];
        for (d, n, name) in counts {
            if d != n {
                return Err(Error::Invalid(format!("{name}: count {d} but {n} columns listed")));
            }
            if d == 0 {
                return Err(Error::Invalid(format!("{name} block must contain at least one feature")));
            }
        }
        for cols in [&self.shared_columns, &self.private_source_columns, &self.private_target_columns] {
            if has_duplicates(cols) {
                return Err(Error::Invalid("duplicate column in feature partition".into()));
            }
        }
        if overlaps(&self.shared_columns, &self.private_source_columns)
            || overlaps(&self.shared_columns, &self.private_target_columns)
        {
            return Err(Error::Invalid("shared and private columns overlap".into()));
        }
        Ok(())
    }

    pub fn d_source(&self) -> usize {
        self.d_shared + self.d_private_source
    }

    pub fn d_target(&self) -> usize {
        self.d_shared + self.d_private_target
    }

    pub fn d_domain(&self, domain: Domain) -> usize {
        match domain {
            Domain::Source => self.d_source(),
            Domain::Target => self.d_target(),
        }
    }

    pub fn d_private(&self, domain: Domain) -> usize {
        match domain {
            Domain::Source => self.d_private_source,
            Domain::Target => self.d_private_target,
        }
    }

    pub fn private_columns(&self, domain: Domain) -> &[usize] {
        match domain {
            Domain::Source => &self.private_source_columns,
            Domain::Target => &self.private_target_columns,
        }
    }

    /// Full-matrix columns making up one domain's feature vector, shared first.
    pub fn domain_columns(&self, domain: Domain) -> Vec<usize> {
        let mut cols = self.shared_columns.clone();
        cols.extend_from_slice(self.private_columns(domain));
        cols
    }

    /// Number of columns the full covariate matrix must have.
    pub fn d_full(&self) -> usize {
        self.shared_columns
            .iter()
            .chain(&self.private_source_columns)
            .chain(&self.private_target_columns)
            .max()
            .map_or(0, |m| m + 1)
    }
}

/// Samples block sizes uniformly from `[5, d_full / 3]` and disjoint column sets.
pub fn sample_partition(d_full: usize, rng: &mut Rng) -> Result<FeaturePartition> {
    if d_full < 15 {
        return Err(Error::Invalid(format!(
            "need at least 15 features to sample a partition, got {d_full}"
        )));
    }
    let hi = d_full / 3;
    let d_s = rng.random_range(5..=hi);
    let d_r = rng.random_range(5..=hi);
    let d_t = rng.random_range(5..=hi);
    let mut cols: Vec<usize> = (0..d_full).collect();
    cols.shuffle(rng);
    let shared = cols[..d_s].to_vec();
    let source = cols[d_s..d_s + d_r].to_vec();
    let target = cols[d_s + d_r..d_s + d_r + d_t].to_vec();
    FeaturePartition::new(shared, source, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::rng_from_seed;

    #[test]
    fn minimum_width_forces_blocks_of_five() {
        let p = sample_partition(15, &mut rng_from_seed(1)).unwrap();
        assert_eq!((p.d_shared, p.d_private_source, p.d_private_target), (5, 5, 5));
    }

    #[test]
    fn twins_width_sizes_and_disjointness() {
        for seed in 0..50 {
            let p = sample_partition(39, &mut rng_from_seed(seed)).unwrap();
            for d in [p.d_shared, p.d_private_source, p.d_private_target] {
                assert!((5..=13).contains(&d));
            }
            let mut all = p.shared_columns.clone();
            all.extend(&p.private_source_columns);
            all.extend(&p.private_target_columns);
            assert!(!has_duplicates(&all));
            assert!(all.iter().all(|&c| c < 39));
        }
    }

    #[test]
    fn partition_is_seed_deterministic() {
        let a = sample_partition(30, &mut rng_from_seed(9)).unwrap();
        let b = sample_partition(30, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_features_is_rejected() {
        assert!(sample_partition(14, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        assert!(FeaturePartition::new(vec![0, 1], vec![1, 2], vec![3]).is_err());
        assert!(FeaturePartition::new(vec![0], vec![], vec![3]).is_err());
        // private blocks of different domains may coincide
        assert!(FeaturePartition::new(vec![0], vec![1], vec![1]).is_ok());
    }
}
