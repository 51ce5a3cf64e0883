use crate::error::Result;
use crate::nn::{frobenius_orth, frobenius_orth_grad, Matrix};

/// `||ζ^{s_R}ᵀ ζ^{p_R}||²_F + ||ζ^{s_T}ᵀ ζ^{p_T}||²_F`, each domain paired with its
/// own shared representation.
pub fn orth_feature_loss(zs_source: &Matrix, zp_source: &Matrix, zs_target: &Matrix, zp_target: &Matrix) -> Result<f64> {
    Ok(frobenius_orth(zs_source, zp_source)? + frobenius_orth(zs_target, zp_target)?)
}

/// [`orth_feature_loss`] with gradients for all four representation blocks.
#[derive(Clone, Debug)]
pub struct OrthFeatureGrad {
    pub value: f64,
    pub zs_source: Matrix,
    pub zp_source: Matrix,
    pub zs_target: Matrix,
    pub zp_target: Matrix,
}

pub fn orth_feature_grad(zs_source: &Matrix, zp_source: &Matrix, zs_target: &Matrix, zp_target: &Matrix) -> Result<OrthFeatureGrad> {
    let r = frobenius_orth_grad(zs_source, zp_source)?;
    let t = frobenius_orth_grad(zs_target, zp_target)?;
    Ok(OrthFeatureGrad {
        value: r.value + t.value,
        zs_source: r.grad_a,
        zp_source: r.grad_b,
        zs_target: t.grad_a,
        zp_target: t.grad_b,
    })
}
