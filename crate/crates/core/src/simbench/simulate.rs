use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{
    assign_treatments, generate_covariates, simulate_outcomes, split_dataset, CoefficientSet, Dataset, SimConfig,
    SplitDataset,
};
use crate::error::{shape_err, Error, Result};
use crate::nn::{mix_seed, label_hash, rng_from_seed, Matrix};
use crate::Domain;

/// One simulated source/target pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPair {
    pub source: Dataset,
    pub target: Dataset,
    pub coefficients: CoefficientSet,
}

/// [`SimulatedPair`] after splitting each domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPair {
    pub source: SplitDataset,
    pub target: SplitDataset,
    pub coefficients: CoefficientSet,
}

fn build_domain(
    x_full: &Matrix,
    rows: &[usize],
    config: &SimConfig,
    coeffs: &CoefficientSet,
    domain: Domain,
    rng: &mut crate::nn::Rng,
) -> Result<Dataset> {
    let x = x_full.select_rows(rows).select_cols(&config.partition.domain_columns(domain));
    let po = simulate_outcomes(&x, &config.partition, coeffs, config, domain, rng)?;
    let kappa = match domain {
        Domain::Source => config.kappa_source,
        Domain::Target => config.kappa_target,
    };
    let (w, pi) = assign_treatments(&po.mu0, &po.mu1, kappa, rng)?;
    let y = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| if wi == 1 { po.y1[i] } else { po.y0[i] })
        .collect();
    let tau = po.mu1.iter().zip(&po.mu0).map(|(a, b)| a - b).collect();
    Ok(Dataset {
        x,
        d_shared: config.partition.d_shared,
        w,
        y,
        mu0: po.mu0,
        mu1: po.mu1,
        tau,
        pi,
        domain,
    })
}

/// Simulates both domains from `config`.
///
/// With `covariates = None`, `n_source + n_target` synthetic rows of width
/// `partition.d_full()` are generated. A supplied matrix must have at least that
/// many rows; a random subset of rows is assigned to each domain without overlap.
pub fn simulate(config: &SimConfig, covariates: Option<&Matrix>) -> Result<SimulatedPair> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let n = config.n_source + config.n_target;
    let d_full = config.partition.d_full();
    let generated;
    let x_full = match covariates {
        Some(x) => {
            if x.cols() < d_full {
                return shape_err("simulate", format!(">= {d_full} covariate columns"), x.cols());
            }
            if x.rows() < n {
                return Err(Error::Invalid(format!(
                    "covariate matrix has {} rows, need n_source + n_target = {n}",
                    x.rows()
                )));
            }
            x
        }
        None => {
            generated = generate_covariates(n, d_full, &mut rng)?;
            &generated
        }
    };
    let mut rows: Vec<usize> = (0..x_full.rows()).collect();
    rows.shuffle(&mut rng);
    let coefficients = CoefficientSet::draw(&config.partition, config, &mut rng)?;
    let source = build_domain(x_full, &rows[..config.n_source], config, &coefficients, Domain::Source, &mut rng)?;
    let target = build_domain(x_full, &rows[config.n_source..n], config, &coefficients, Domain::Target, &mut rng)?;
    Ok(SimulatedPair {
        source,
        target,
        coefficients,
    })
}

/// [`simulate`] followed by a seeded 56/24/20 split of each domain.
pub fn simulate_split(config: &SimConfig, covariates: Option<&Matrix>) -> Result<SplitPair> {
    let pair = simulate(config, covariates)?;
    let mut rng = rng_from_seed(mix_seed(&[config.seed, label_hash("split")]));
    Ok(SplitPair {
        source: split_dataset(&pair.source, &mut rng)?,
        target: split_dataset(&pair.target, &mut rng)?,
        coefficients: pair.coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simbench::FeaturePartition;

    fn config(seed: u64) -> SimConfig {
        SimConfig::new(FeaturePartition::contiguous(10, 10, 10).unwrap(), 300, 100, seed)
    }

    #[test]
    fn factual_outcomes_and_effects_are_consistent() {
        let pair = simulate(&config(1), None).unwrap();
        for ds in [&pair.source, &pair.target] {
            ds.validate().unwrap();
            assert_eq!(ds.x.cols(), 20);
            assert!(ds.pi.iter().all(|&p| p > 0.0 && p < 1.0));
        }
        assert_eq!(pair.source.len(), 300);
        assert_eq!(pair.target.len(), 100);
        assert_eq!(pair.source.domain, Domain::Source);
    }

    #[test]
    fn identical_config_gives_identical_data() {
        assert_eq!(simulate(&config(7), None).unwrap(), simulate(&config(7), None).unwrap());
        assert_ne!(simulate(&config(7), None).unwrap(), simulate(&config(8), None).unwrap());
        assert_eq!(simulate_split(&config(7), None).unwrap(), simulate_split(&config(7), None).unwrap());
    }

    #[test]
    fn supplied_covariates_must_be_large_enough() {
        let x = Matrix::zeros(399, 30);
        assert!(simulate(&config(0), Some(&x)).is_err());
        let x = Matrix::filled(400, 29, 0.5);
        assert!(simulate(&config(0), Some(&x)).is_err());
        let x = Matrix::filled(400, 30, 0.5);
        simulate(&config(0), Some(&x)).unwrap();
    }
}
