//! Standardized differences for covariate balance checks.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BalanceError {
    #[error("standardized difference needs at least two observations per sample")]
    TooFew,
    #[error("pooled variance is zero")]
    ZeroVariance,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// `(mean_a - mean_b) / sqrt((var_a + var_b) / 2)` with n-1 sample variances.
/// Values below 0.1 in magnitude are conventionally read as balanced.
pub fn standardized_difference(a: &[f64], b: &[f64]) -> Result<f64, BalanceError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(BalanceError::TooFew);
    }
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let pooled = (var_a + var_b) / 2.0;
    if pooled <= 0.0 {
        return Err(BalanceError::ZeroVariance);
    }
    Ok((mean_a - mean_b) / pooled.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_are_zero() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(standardized_difference(&xs, &xs).unwrap(), 0.0);
    }

    #[test]
    fn hand_arithmetic_value() {
        // Two-point samples with exact sample variance 0.24:
        // {0.6 - c, 0.6 + c} with c = sqrt(0.12) has mean 0.6, var 0.24.
        let c = 0.12f64.sqrt();
        let a = [0.6 - c, 0.6 + c];
        let b = [0.4 - c, 0.4 + c];
        let d = standardized_difference(&a, &b).unwrap();
        let expected = 0.2 / 0.24f64.sqrt();
        assert!((d - expected).abs() < 1e-12);
        assert!((d - 0.408).abs() < 1e-3);
    }

    #[test]
    fn antisymmetric_in_arguments() {
        let a = [1.0, 2.0, 4.0];
        let b = [0.0, 3.0, 5.0];
        let d_ab = standardized_difference(&a, &b).unwrap();
        let d_ba = standardized_difference(&b, &a).unwrap();
        assert!((d_ab + d_ba).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert_eq!(standardized_difference(&[1.0], &[1.0, 2.0]), Err(BalanceError::TooFew));
        assert_eq!(
            standardized_difference(&[2.0, 2.0], &[2.0, 2.0]),
            Err(BalanceError::ZeroVariance)
        );
    }
}
