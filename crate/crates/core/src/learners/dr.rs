use crate::error::{shape_err, Error, Result};

/// Propensity estimates are clipped to `[PROPENSITY_CLIP, 1 − PROPENSITY_CLIP]`.
pub const PROPENSITY_CLIP: f64 = 0.01;

/// Doubly robust pseudo-outcome
/// `(W/π − (1−W)/(1−π)) Y + (1 − W/π) μ₁ − (1 − (1−W)/(1−π)) μ₀`
/// with `π` clipped first.
pub fn dr_pseudo_outcome(y: f64, w: u8, mu0_hat: f64, mu1_hat: f64, pi_hat: f64) -> Result<f64> {
    if w > 1 {
        return Err(Error::Invalid(format!("treatment must be 0 or 1, got {w}")));
    }
    if !(0.0..=1.0).contains(&pi_hat) {
        return Err(Error::Invalid(format!("propensity {pi_hat} outside [0, 1]")));
    }
    let pi = pi_hat.clamp(PROPENSITY_CLIP, 1.0 - PROPENSITY_CLIP);
    let w = f64::from(w);
    let a = w / pi;
    let b = (1.0 - w) / (1.0 - pi);
    Ok((a - b) * y + (1.0 - a) * mu1_hat - (1.0 - b) * mu0_hat)
}

/// Elementwise [`dr_pseudo_outcome`].
pub fn dr_pseudo_outcomes(y: &[f64], w: &[u8], mu0_hat: &[f64], mu1_hat: &[f64], pi_hat: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    for len in [w.len(), mu0_hat.len(), mu1_hat.len(), pi_hat.len()] {
        if len != n {
            return shape_err("dr_pseudo_outcomes", n, len);
        }
    }
    (0..n)
        .map(|i| dr_pseudo_outcome(y[i], w[i], mu0_hat[i], mu1_hat[i], pi_hat[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_example() {
        let v = dr_pseudo_outcome(2.0, 0, 1.0, 3.0, 0.25).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_effect_fixed_point() {
        for w in [0, 1] {
            assert_eq!(dr_pseudo_outcome(1.7, w, 1.7, 1.7, 0.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn clipping_and_errors() {
        let a = dr_pseudo_outcome(1.0, 1, 0.0, 0.0, 0.0).unwrap();
        let b = dr_pseudo_outcome(1.0, 1, 0.0, 0.0, PROPENSITY_CLIP).unwrap();
        assert_eq!(a, b);
        assert!(dr_pseudo_outcome(1.0, 1, 0.0, 0.0, 1.5).is_err());
        assert!(dr_pseudo_outcome(1.0, 1, 0.0, 0.0, f64::NAN).is_err());
        assert!(dr_pseudo_outcome(1.0, 2, 0.0, 0.0, 0.5).is_err());
        assert!(dr_pseudo_outcomes(&[1.0], &[1, 0], &[0.0], &[0.0], &[0.5]).is_err());
    }
}
