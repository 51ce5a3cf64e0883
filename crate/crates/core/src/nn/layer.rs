//! Fully connected layer with cached forward state for backpropagation.

use rand::RngExt;
use serde::{Deserialize, Serialize};

use super::{Activation, Matrix, Rng};
use crate::error::{shape_err, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `in_dim x out_dim`
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// State captured by [`DenseLayer::forward`]; consumed by [`DenseLayer::backward`].
#[derive(Clone, Debug)]
pub struct DenseCache {
    input: Matrix,
    pre_activation: Matrix,
}

impl DenseCache {
    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn pre_activation(&self) -> &Matrix {
        &self.pre_activation
    }
}

#[derive(Clone, Debug)]
pub struct DenseGrads {
    pub input: Matrix,
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.cols() {
            return shape_err("DenseLayer::new", weights.cols(), bias.len());
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(in_dim, out_dim),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    /// Uniform fan-scaled initialisation with zero bias: LeCun bound `sqrt(3 / fan_in)`
    /// for selu, He bound `sqrt(6 / fan_in)` for relu, Glorot bound
    /// `sqrt(6 / (fan_in + fan_out))` otherwise.
    pub fn init(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Rng) -> Self {
        let bound = if activation == Activation::Selu {
            (3.0 / in_dim.max(1) as f64).sqrt()
        } else if activation.is_rectifier() {
            (6.0 / in_dim.max(1) as f64).sqrt()
        } else {
            (6.0 / (in_dim + out_dim).max(1) as f64).sqrt()
        };
        let data = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            weights: Matrix::from_vec(in_dim, out_dim, data).expect("sized above"),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn num_params(&self) -> usize {
        self.weights.data().len() + self.bias.len()
    }

    fn pre_activation(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.in_dim() {
            return shape_err("dense_forward", self.in_dim(), input.cols());
        }
        let mut pre = input.matmul(&self.weights)?;
        for r in 0..pre.rows() {
            for (v, b) in pre.row_mut(r).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(pre)
    }

    fn activate(&self, pre: &Matrix) -> Result<Matrix> {
        let mut out = pre.clone();
        let act = self.activation;
        if act != Activation::Linear {
            out.data_mut().iter_mut().for_each(|v| *v = act.apply(*v));
        }
        out.ensure_finite("dense_forward output")?;
        Ok(out)
    }

    /// `activation(input · W + b)` together with the cache for the backward pass.
    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, DenseCache)> {
        input.ensure_finite("dense_forward input")?;
        let pre = self.pre_activation(input)?;
        let out = self.activate(&pre)?;
        Ok((
            out,
            DenseCache {
                input: input.clone(),
                pre_activation: pre,
            },
        ))
    }

    /// Forward pass without keeping state.
    pub fn infer(&self, input: &Matrix) -> Result<Matrix> {
        let pre = self.pre_activation(input)?;
        self.activate(&pre)
    }

    /// Exact gradients of a scalar loss given `upstream = dL/d(output)`.
    pub fn backward(&self, cache: &DenseCache, upstream: &Matrix) -> Result<DenseGrads> {
        let delta = self.output_delta(cache, upstream)?;
        let weights = cache.input.t_matmul(&delta)?;
        let bias = delta.col_sums();
        let input = delta.matmul_t(&self.weights)?;
        Ok(DenseGrads {
            input,
            weights,
            bias,
        })
    }

    /// `dL/d(pre-activation)`.
    pub(crate) fn output_delta(&self, cache: &DenseCache, upstream: &Matrix) -> Result<Matrix> {
        if upstream.shape() != cache.pre_activation.shape() {
            return shape_err(
                "dense_backward",
                format!("{:?}", cache.pre_activation.shape()),
                format!("{:?}", upstream.shape()),
            );
        }
        if cache.input.cols() != self.in_dim() {
            return shape_err("dense_backward", self.in_dim(), cache.input.cols());
        }
        let mut delta = upstream.clone();
        if self.activation != Activation::Linear {
            let act = self.activation;
            for (d, &z) in delta.data_mut().iter_mut().zip(cache.pre_activation.data()) {
                *d *= act.derivative(z);
            }
        }
        Ok(delta)
    }
}
