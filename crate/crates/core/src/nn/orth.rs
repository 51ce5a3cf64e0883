//! Squared-Frobenius orthogonality penalty `||aᵀ b||²_F`.

use super::Matrix;
use crate::error::{shape_err, Result};

/// Penalty value with its gradients with respect to both operands.
#[derive(Clone, Debug)]
pub struct OrthPenalty {
    pub value: f64,
    pub grad_a: Matrix,
    pub grad_b: Matrix,
}

/// `||aᵀ b||²_F` for `a: n x p`, `b: n x q`.
pub fn frobenius_orth(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.rows() != b.rows() {
        return shape_err("frobenius_orth", a.rows(), b.rows());
    }
    Ok(a.t_matmul(b)?.frobenius_sq())
}

/// Value plus `∂/∂a = 2 b (bᵀ a)` and `∂/∂b = 2 a (aᵀ b)`.
pub fn frobenius_orth_grad(a: &Matrix, b: &Matrix) -> Result<OrthPenalty> {
    if a.rows() != b.rows() {
        return shape_err("frobenius_orth", a.rows(), b.rows());
    }
    let cross = a.t_matmul(b)?; // p x q
    let value = cross.frobenius_sq();
    let mut grad_a = b.matmul_t(&cross)?; // n x p
    grad_a.scale(2.0);
    let mut grad_b = a.matmul(&cross)?; // n x q
    grad_b.scale(2.0);
    Ok(OrthPenalty {
        value,
        grad_a,
        grad_b,
    })
}
