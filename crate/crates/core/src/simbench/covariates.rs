//! Covariate sourcing: synthetic standard normals or a numeric CSV, min-max scaled.

use std::collections::HashMap;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::FeaturePartition;
use crate::error::{Error, Result};
use crate::nn::{Matrix, Rng};

/// Column-name schema accompanying a covariate CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariateSchema {
    pub shared: Vec<String>,
    pub private_source: Vec<String>,
    pub private_target: Vec<String>,
}

impl CovariateSchema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Scales each column into `[0, 1]`; constant columns become 0.5.
pub fn minmax_scale(x: &mut Matrix) {
    for c in 0..x.cols() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in 0..x.rows() {
            let v = x.get(r, c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = hi - lo;
        for r in 0..x.rows() {
            let v = if span > 0.0 { (x.get(r, c) - lo) / span } else { 0.5 };
            x.set(r, c, v);
        }
    }
}

/// `n x d` i.i.d. standard normals, min-max scaled per column.
pub fn generate_covariates(n: usize, d: usize, rng: &mut Rng) -> Result<Matrix> {
    if n == 0 || d == 0 {
        return Err(Error::Invalid("covariate matrix needs n >= 1 and d >= 1".into()));
    }
    let data = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    let mut x = Matrix::from_vec(n, d, data)?;
    minmax_scale(&mut x);
    Ok(x)
}

/// Reads the schema's columns from a CSV with a header row.
///
/// The returned matrix holds the shared, private-source and private-target
/// columns in that order, and the partition indexes into it.
pub fn load_covariates_csv(path: impl AsRef<Path>, schema: &CovariateSchema) -> Result<(Matrix, FeaturePartition)> {
    let file = std::fs::File::open(path)?;
    read_covariates(file, schema)
}

pub fn read_covariates<R: std::io::Read>(reader: R, schema: &CovariateSchema) -> Result<(Matrix, FeaturePartition)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: HashMap<String, usize> = rdr
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect();
    let names: Vec<&String> = schema
        .shared
        .iter()
        .chain(&schema.private_source)
        .chain(&schema.private_target)
        .collect();
    let idx = names
        .iter()
        .map(|n| {
            header
                .get(n.as_str())
                .copied()
                .ok_or_else(|| Error::Invalid(format!("schema column `{n}` missing from csv header")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut data = Vec::new();
    let mut rows = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (&c, name) in idx.iter().zip(&names) {
            let cell = rec
                .get(c)
                .ok_or_else(|| Error::Invalid(format!("row {}: missing column `{name}`", line + 1)))?;
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Invalid(format!("row {}: non-numeric value `{cell}` in `{name}`", line + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::Invalid(format!("row {}: non-finite value in `{name}`", line + 1)));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Invalid("csv contains no data rows".into()));
    }
    let mut x = Matrix::from_vec(rows, names.len(), data)?;
    minmax_scale(&mut x);
    let partition = FeaturePartition::contiguous(
        schema.shared.len(),
        schema.private_source.len(),
        schema.private_target.len(),
    )?;
    Ok((x, partition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::rng_from_seed;

    #[test]
    fn constant_column_becomes_half() {
        let mut x = Matrix::from_rows(&[[3.0, 0.0], [3.0, 5.0], [3.0, 10.0]]).unwrap();
        minmax_scale(&mut x);
        assert_eq!(x.col_range(0, 1).data(), &[0.5, 0.5, 0.5]);
        assert_eq!(x.col_range(1, 2).data(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn synthetic_covariates_are_in_unit_interval() {
        let x = generate_covariates(1000, 30, &mut rng_from_seed(5)).unwrap();
        assert_eq!(x.shape(), (1000, 30));
        assert!(x.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    fn schema() -> CovariateSchema {
        CovariateSchema {
            shared: vec!["a".into()],
            private_source: vec!["b".into()],
            private_target: vec!["c".into()],
        }
    }

    #[test]
    fn csv_columns_follow_schema_order() {
        let text = "c,b,a,unused\n1,10,0,x\n2,20,5,y\n3,30,10,z\n";
        let (x, p) = read_covariates(text.as_bytes(), &schema()).unwrap();
        assert_eq!(x.shape(), (3, 3));
        assert_eq!(x.col_range(0, 1).data(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.domain_columns(crate::Domain::Target), vec![0, 2]);
    }

    #[test]
    fn csv_errors() {
        assert!(read_covariates("a,b\n1,2\n".as_bytes(), &schema()).is_err());
        assert!(read_covariates("a,b,c\n1,oops,3\n".as_bytes(), &schema()).is_err());
        assert!(read_covariates("a,b,c\n".as_bytes(), &schema()).is_err());
        assert!(read_covariates("a,b,c\n1,2\n".as_bytes(), &schema()).is_err());
    }
}
