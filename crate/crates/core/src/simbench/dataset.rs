use rand::seq::SliceRandom;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::nn::{Matrix, Rng};
use crate::Domain;

/// Observed data for one domain plus the simulator's ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// `n x d_domain`, shared features first.
    pub x: Matrix,
    /// Number of leading columns of `x` that are shared across domains.
    pub d_shared: usize,
    pub w: Vec<u8>,
    /// Factual outcome.
    pub y: Vec<f64>,
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    pub tau: Vec<f64>,
    /// True propensity.
    pub pi: Vec<f64>,
    pub domain: Domain,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Dataset {
            x: self.x.select_rows(idx),
            d_shared: self.d_shared,
            w: idx.iter().map(|&i| self.w[i]).collect(),
            y: pick(&self.y),
            mu0: pick(&self.mu0),
            mu1: pick(&self.mu1),
            tau: pick(&self.tau),
            pi: pick(&self.pi),
            domain: self.domain,
        }
    }

    pub fn treated_fraction(&self) -> f64 {
        self.w.iter().map(|&w| w as f64).sum::<f64>() / self.len().max(1) as f64
    }

    pub fn arm_count(&self, arm: u8) -> usize {
        self.w.iter().filter(|&&w| w == arm).count()
    }

    /// Factual-outcome and ground-truth consistency checks.
    pub fn validate(&self) -> Result<()> {
        let n = self.x.rows();
        for (len, name) in [
            (self.w.len(), "w"),
            (self.y.len(), "y"),
            (self.mu0.len(), "mu0"),
            (self.mu1.len(), "mu1"),
            (self.tau.len(), "tau"),
            (self.pi.len(), "pi"),
        ] {
            if len != n {
                return shape_err("Dataset", n, format!("{name} of length {len}"));
            }
        }
        if self.d_shared == 0 || self.d_shared > self.x.cols() {
            return Err(Error::Invalid(format!("d_shared = {} outside 1..={}", self.d_shared, self.x.cols())));
        }
        if self.w.iter().any(|&w| w > 1) {
            return Err(Error::Invalid("treatments must be binary".into()));
        }
        for i in 0..n {
            if self.tau[i] != self.mu1[i] - self.mu0[i] {
                return Err(Error::Invalid(format!("tau != mu1 - mu0 at row {i}")));
            }
        }
        Ok(())
    }
}

/// Train / validation / test partition of one domain's data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitDataset {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

impl SplitDataset {
    pub fn domain(&self) -> Domain {
        self.train.domain
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Split sizes `(train, validation, test)` for `n` rows: validation and test take
/// `floor(0.24 n)` and `floor(0.20 n)`, training keeps the remainder.
pub fn split_sizes(n: usize) -> Result<(usize, usize, usize)> {
    if n < 20 {
        return Err(Error::Invalid(format!("need at least 20 rows to split, got {n}")));
    }
    let val = n * 24 / 100;
    let test = n * 20 / 100;
    Ok((n - val - test, val, test))
}

/// Random 56/24/20 split.
pub fn split_dataset(ds: &Dataset, rng: &mut Rng) -> Result<SplitDataset> {
    let (n_train, n_val, _) = split_sizes(ds.len())?;
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(rng);
    Ok(SplitDataset {
        train: ds.subset(&idx[..n_train]),
        validation: ds.subset(&idx[n_train..n_train + n_val]),
        test: ds.subset(&idx[n_train + n_val..]),
    })
}

/// Target sizes allowed when the target size is fixed rather than sampled.
pub const FIXED_TARGET_SIZES: [usize; 7] = [100, 200, 300, 500, 1000, 2000, 4000];

/// `N_T ~ U(100, 500)`, `N_R ~ U(1000, n_full − N_T)`.
pub fn sample_domain_sizes(n_full: usize, rng: &mut Rng) -> Result<(usize, usize)> {
    if n_full < 1500 {
        return Err(Error::Invalid(format!("need n_full >= 1500, got {n_full}")));
    }
    let n_target = rng.random_range(100..=500);
    let n_source = rng.random_range(1000..=n_full - n_target);
    Ok((n_target, n_source))
}

/// Source size for a fixed target size from [`FIXED_TARGET_SIZES`].
pub fn sample_source_size(n_full: usize, n_target: usize, rng: &mut Rng) -> Result<usize> {
    if !FIXED_TARGET_SIZES.contains(&n_target) {
        return Err(Error::Invalid(format!(
            "fixed target size must be one of {FIXED_TARGET_SIZES:?}, got {n_target}"
        )));
    }
    if n_full < n_target + 1000 {
        return Err(Error::Invalid(format!(
            "n_full = {n_full} leaves fewer than 1000 source rows for n_target = {n_target}"
        )));
    }
    Ok(rng.random_range(1000..=n_full - n_target))
}
