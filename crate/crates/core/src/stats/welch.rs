//! Welch's two-sample t-test with Satterthwaite degrees of freedom.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WelchError {
    #[error("each sample needs at least two observations")]
    TooFew,
    #[error("both samples are constant; the statistic is undefined")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchResult {
    pub difference: f64,
    pub t: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Two-sided Welch test of mean(a) - mean(b).
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchResult, WelchError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(WelchError::TooFew);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var = |xs: &[f64], m: f64| {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    let difference = ma - mb;

    let sa = va / na;
    let sb = vb / nb;
    if sa + sb <= 0.0 {
        if difference == 0.0 {
            // Identical constant samples: no evidence of any difference.
            return Ok(WelchResult { difference: 0.0, t: 0.0, dof: f64::INFINITY, p_value: 1.0 });
        }
        return Err(WelchError::ZeroVariance);
    }
    let t = difference / (sa + sb).sqrt();
    let dof = (sa + sb).powi(2) / (sa.powi(2) / (na - 1.0) + sb.powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
    let p_value = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(WelchResult { difference, t, dof, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_p_one() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let r = welch_t(&xs, &xs).unwrap();
        assert_eq!(r.difference, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_fixture() {
        // a = {0,0,1,1}, b = {1,1,2,2}: means 0.5 and 1.5, variances 1/3,
        // se = sqrt(1/6), t = -sqrt(6) = -2.449, dof = 6.
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [1.0, 1.0, 2.0, 2.0];
        let r = welch_t(&a, &b).unwrap();
        assert!((r.difference - -1.0).abs() < 1e-12);
        assert!((r.t - -(6.0f64.sqrt())).abs() < 1e-12);
        assert!((r.dof - 6.0).abs() < 1e-12);
        // Reference value 2*(1 - F_t6(sqrt(6))) = 0.049825262780577.
        assert!((r.p_value - 0.049825262780577).abs() < 1e-12, "p = {}", r.p_value);
    }

    #[test]
    fn antisymmetric_in_arguments() {
        let a = [0.0, 0.4, 1.0, 1.3];
        let b = [1.0, 1.9, 2.0, 2.2];
        let ab = welch_t(&a, &b).unwrap();
        let ba = welch_t(&b, &a).unwrap();
        assert!((ab.difference + ba.difference).abs() < 1e-15);
        assert!((ab.p_value - ba.p_value).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(welch_t(&[1.0], &[1.0, 2.0]), Err(WelchError::TooFew));
        assert_eq!(welch_t(&[1.0, 1.0], &[2.0, 2.0]), Err(WelchError::ZeroVariance));
    }
}
