use rand::seq::{index, SliceRandom};

use crate::error::{shape_err, Error, Result};
use crate::nn::{Matrix, Rng};
use crate::simbench::Dataset;

/// Features, treatments and regression targets of one minibatch.
///
/// `y` holds whatever the model regresses: factual outcomes, pseudo-outcomes, or
/// (for propensity heads) the treatment labels are read from `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub x: Matrix,
    pub w: Vec<u8>,
    pub y: Vec<f64>,
}

impl Batch {
    pub fn new(x: Matrix, w: Vec<u8>, y: Vec<f64>) -> Result<Self> {
        if w.len() != x.rows() || y.len() != x.rows() {
            return shape_err("Batch", x.rows(), format!("w {} / y {}", w.len(), y.len()));
        }
        if w.iter().any(|&v| v > 1) {
            return Err(Error::Invalid("treatments must be 0 or 1".into()));
        }
        Ok(Self { x, w, y })
    }

    pub fn from_dataset(ds: &Dataset) -> Self {
        Self {
            x: ds.x.clone(),
            w: ds.w.clone(),
            y: ds.y.clone(),
        }
    }

    /// A batch with no rows and `d` feature columns.
    pub fn empty(d: usize) -> Self {
        Self {
            x: Matrix::zeros(0, d),
            w: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Batch {
        Batch {
            x: self.x.select_rows(idx),
            w: idx.iter().map(|&i| self.w[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Same rows restricted to the given feature columns.
    pub fn with_columns(&self, cols: std::ops::Range<usize>) -> Batch {
        Batch {
            x: self.x.col_range(cols.start, cols.end),
            w: self.w.clone(),
            y: self.y.clone(),
        }
    }

    pub fn with_targets(&self, y: Vec<f64>) -> Result<Batch> {
        Batch::new(self.x.clone(), self.w.clone(), y)
    }

    pub fn arm_indices(&self, arm: u8) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.w[i] == arm).collect()
    }

    pub fn w_f64(&self) -> Vec<f64> {
        self.w.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Row indices of each paired step in one epoch.
///
/// The larger domain is shuffled and cut into consecutive chunks of `batch`, giving
/// `ceil(max(n_R, n_T) / batch)` steps. The smaller domain contributes a fresh random
/// subset of `min(batch, n)` rows at every step, so its rows recur across steps.
pub(crate) fn paired_epoch(n_source: usize, n_target: usize, batch: usize, rng: &mut Rng) -> Vec<(Vec<usize>, Vec<usize>)> {
    let source_larger = n_source >= n_target;
    let (n_big, n_small) = if source_larger { (n_source, n_target) } else { (n_target, n_source) };
    let mut order: Vec<usize> = (0..n_big).collect();
    order.shuffle(rng);
    order
        .chunks(batch)
        .map(|chunk| {
            let small = if n_small == 0 {
                Vec::new()
            } else {
                index::sample(rng, n_small, batch.min(n_small)).into_vec()
            };
            if source_larger {
                (chunk.to_vec(), small)
            } else {
                (small, chunk.to_vec())
            }
        })
        .collect()
}
