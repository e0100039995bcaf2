//! Fixed-effects OLS and logistic regression with sandwich covariance.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::design::{DesignMatrix, ObservationMatrix, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeType {
    /// Cluster-robust sandwich over the table's cluster column, with the
    /// (G/(G-1)) * ((n-1)/(n-k)) finite-sample factor.
    ClusterRobust,
    /// Heteroskedasticity-robust (HC1): per-row meat with factor n/(n-k).
    Hc1,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub se: SeType,
    pub max_iterations: usize,
    pub gradient_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { se: SeType::ClusterRobust, max_iterations: 100, gradient_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub family: String,
    pub coefficients: Vec<Coefficient>,
    pub n_obs: usize,
    pub n_dropped_rows: usize,
    pub n_clusters: usize,
    pub converged: bool,
    pub separation_suspected: bool,
    pub dropped_columns: Vec<String>,
    /// How standard errors and p-values were computed.
    pub se_type: String,
    pub p_reference: String,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

fn cross_products(x: &DMatrix<f64>, weights: Option<&DVector<f64>>) -> DMatrix<f64> {
    match weights {
        None => x.transpose() * x,
        Some(w) => {
            let mut xw = x.clone();
            for (mut row, &wi) in xw.row_iter_mut().zip(w.iter()) {
                row *= wi;
            }
            x.transpose() * xw
        }
    }
}

/// Sandwich covariance: bread_inv * meat * bread_inv with the finite-sample
/// factor for the requested SE type. `scores` holds per-row score vectors
/// x_i * e_i as rows.
fn sandwich_cov(
    bread_inv: &DMatrix<f64>,
    scores: &DMatrix<f64>,
    cluster_ids: &[usize],
    n_clusters: usize,
    se: SeType,
) -> (DMatrix<f64>, f64, usize) {
    let n = scores.nrows();
    let k = scores.ncols();
    let (meat, factor, g_used) = match se {
        SeType::ClusterRobust => {
            let mut sums = DMatrix::zeros(n_clusters, k);
            for (i, &g) in cluster_ids.iter().enumerate() {
                for j in 0..k {
                    sums[(g, j)] += scores[(i, j)];
                }
            }
            let meat = sums.transpose() * &sums;
            let g = n_clusters as f64;
            let nf = n as f64;
            let kf = k as f64;
            let factor = (g / (g - 1.0)) * ((nf - 1.0) / (nf - kf));
            (meat, factor, n_clusters)
        }
        SeType::Hc1 => {
            let meat = scores.transpose() * scores;
            let nf = n as f64;
            let kf = k as f64;
            (meat, nf / (nf - kf), n)
        }
    };
    let cov = bread_inv * meat * bread_inv;
    (cov, factor, g_used)
}

fn two_sided_normal_p(z: f64) -> f64 {
    if !z.is_finite() {
        return f64::NAN;
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    2.0 * (1.0 - normal.cdf(z.abs()))
}

fn two_sided_t_p(t: f64, dof: f64) -> f64 {
    if !t.is_finite() || dof <= 0.0 {
        return f64::NAN;
    }
    let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
    2.0 * (1.0 - dist.cdf(t.abs()))
}

fn assemble(
    family: &str,
    design: &DesignMatrix,
    beta: &DVector<f64>,
    cov: &DMatrix<f64>,
    factor: f64,
    options: FitOptions,
    converged: bool,
    separation_suspected: bool,
    p_of: impl Fn(f64) -> f64,
    p_reference: &str,
) -> RegressionFit {
    let coefficients = design
        .column_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let estimate = beta[j];
            let variance = (cov[(j, j)] * factor).max(0.0);
            let se = variance.sqrt();
            let p_value = if se > 0.0 { p_of(estimate / se) } else { f64::NAN };
            Coefficient { name: name.clone(), estimate, se, p_value }
        })
        .collect();
    RegressionFit {
        family: family.into(),
        coefficients,
        n_obs: design.y.len(),
        n_dropped_rows: design.n_dropped_rows,
        n_clusters: design.n_clusters,
        converged,
        separation_suspected,
        dropped_columns: design.dropped_columns.clone(),
        se_type: match options.se {
            SeType::ClusterRobust => "cluster_robust".into(),
            SeType::Hc1 => "hc1".into(),
        },
        p_reference: p_reference.into(),
    }
}

/// Least squares on the dummy-expanded design with sandwich standard errors.
/// P-values use a t reference with G-1 degrees of freedom under clustering
/// and n-k under HC1.
pub fn fe_ols(data: &ObservationMatrix, options: FitOptions) -> Result<RegressionFit, StatsError> {
    let design = DesignMatrix::build(data)?;
    let x = &design.x;
    let y = &design.y;
    let gram = cross_products(x, None);
    let chol = Cholesky::new(gram.clone())
        .ok_or_else(|| StatsError::Degenerate("X'X not positive definite".into()))?;
    let beta = chol.solve(&(x.transpose() * y));
    let residuals = y - x * &beta;

    let mut scores = x.clone();
    for (mut row, &e) in scores.row_iter_mut().zip(residuals.iter()) {
        row *= e;
    }
    let bread_inv = chol.inverse();
    let (cov, factor, g_used) =
        sandwich_cov(&bread_inv, &scores, &design.cluster_ids, design.n_clusters, options.se);

    let dof = match options.se {
        SeType::ClusterRobust => (g_used as f64) - 1.0,
        SeType::Hc1 => (design.y.len() - design.column_names.len()) as f64,
    };
    let p_reference = match options.se {
        SeType::ClusterRobust => "t(G-1)".to_string(),
        SeType::Hc1 => "t(n-k)".to_string(),
    };
    Ok(assemble(
        "ols",
        &design,
        &beta,
        &cov,
        factor,
        options,
        true,
        false,
        |t| two_sided_t_p(t, dof),
        &p_reference,
    ))
}

/// Maximum-likelihood logit via Newton iterations (IRLS) to gradient
/// max-norm below `gradient_tol`, with sandwich standard errors and normal
/// reference p-values. Separation is flagged, not fatal: the fit is
/// returned with `converged = false` and `separation_suspected = true`.
pub fn fe_logit(data: &ObservationMatrix, options: FitOptions) -> Result<RegressionFit, StatsError> {
    if data.outcome.iter().any(|&v| v.is_finite() && v != 0.0 && v != 1.0) {
        return Err(StatsError::NonBinaryOutcome);
    }
    let design = DesignMatrix::build(data)?;
    let x = &design.x;
    let y = &design.y;
    let n = y.len();
    let k = design.column_names.len();

    let mut beta = DVector::zeros(k);
    let mut converged = false;
    let mut last_chol: Option<Cholesky<f64, nalgebra::Dyn>> = None;

    for _ in 0..options.max_iterations {
        let eta = x * &beta;
        let p = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
        let gradient = x.transpose() * (y - &p);
        if gradient.amax() < options.gradient_tol {
            converged = true;
            // Refresh the bread at the solution.
            let w = p.map(|pi| (pi * (1.0 - pi)).max(1e-12));
            last_chol = Cholesky::new(cross_products(x, Some(&w)));
            break;
        }
        let w = p.map(|pi| (pi * (1.0 - pi)).max(1e-12));
        let hessian = cross_products(x, Some(&w));
        let Some(chol) = Cholesky::new(hessian) else {
            break; // flat or separated likelihood
        };
        beta += chol.solve(&gradient);
        last_chol = Some(chol);
    }

    // A linear predictor over ~15 means fitted probabilities within 3e-7 of
    // the boundary: treat that as quasi-separation even if the gradient
    // technically vanished.
    let separation_suspected = !converged || beta.amax() > 15.0;
    let chol = last_chol
        .ok_or_else(|| StatsError::Degenerate("information matrix not positive definite".into()))?;

    let eta = x * &beta;
    let p = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
    let mut scores = x.clone();
    for (mut row, (&yi, &pi)) in scores.row_iter_mut().zip(y.iter().zip(p.iter())) {
        row *= yi - pi;
    }
    let bread_inv = chol.inverse();
    let (cov, factor, _) =
        sandwich_cov(&bread_inv, &scores, &design.cluster_ids, design.n_clusters, options.se);

    let _ = (n, k);
    Ok(assemble(
        "logit",
        &design,
        &beta,
        &cov,
        factor,
        options,
        converged,
        separation_suspected,
        two_sided_normal_p,
        "normal",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ols_table(y: Vec<f64>, x: Vec<f64>) -> ObservationMatrix {
        let n = y.len();
        ObservationMatrix {
            outcome: y,
            covariates: vec![("x".into(), x)],
            fixed_effects: vec![],
            cluster: (0..n).map(|i| format!("c{i}")).collect(),
        }
    }

    #[test]
    fn exact_fit_has_zero_se() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = fe_ols(&ols_table(y, x), FitOptions::default()).unwrap();
        let coef = fit.coefficient("x").unwrap();
        assert!((coef.estimate - 2.0).abs() < 1e-10);
        assert!(coef.se < 1e-10);
    }

    #[test]
    fn ols_recovers_known_slope() {
        // Deterministic noise pattern, slope 3, intercept -1.
        let n = 200;
        let x: Vec<f64> = (0..n).map(|i| (i as f64) / 10.0).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| -1.0 + 3.0 * v + if i % 2 == 0 { 0.5 } else { -0.5 })
            .collect();
        let fit = fe_ols(&ols_table(y, x), FitOptions::default()).unwrap();
        let slope = fit.coefficient("x").unwrap();
        assert!((slope.estimate - 3.0).abs() < 0.01);
        assert!(slope.p_value < 1e-6);
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64).collect();
        let fe: Vec<String> = (0..n).map(|i| format!("g{}", i % 3)).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, &v)| v * 0.5 + ((i % 5) as f64)).collect();
        let t = ObservationMatrix {
            outcome: y,
            covariates: vec![("x".into(), x)],
            fixed_effects: vec![("g".into(), fe)],
            cluster: (0..n).map(|i| format!("g{}", i % 3)).collect(),
        };
        let design = DesignMatrix::build(&t).unwrap();
        let gram = design.x.transpose() * &design.x;
        let beta = Cholesky::new(gram).unwrap().solve(&(design.x.transpose() * &design.y));
        let resid = &design.y - &design.x * beta;
        let dots = design.x.transpose() * resid;
        assert!(dots.amax() < 1e-6 * n as f64);
    }

    #[test]
    fn logit_requires_binary_outcome() {
        let t = ols_table(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]);
        assert!(matches!(fe_logit(&t, FitOptions::default()), Err(StatsError::NonBinaryOutcome)));
    }

    #[test]
    fn all_zero_outcome_flags_separation() {
        let n = 40;
        let t = ObservationMatrix {
            outcome: vec![0.0; n],
            covariates: vec![("x".into(), (0..n).map(|i| (i % 7) as f64).collect())],
            fixed_effects: vec![],
            cluster: (0..n).map(|i| format!("c{}", i % 5)).collect(),
        };
        let fit = fe_logit(&t, FitOptions::default()).unwrap();
        assert!(fit.separation_suspected);
    }

    #[test]
    fn logit_matches_closed_form_on_grouped_data() {
        // Two covariate levels with known success shares: the saturated
        // logit has intercept log(p0/(1-p0)) and slope log-odds-ratio.
        let mut outcome = Vec::new();
        let mut x = Vec::new();
        for _ in 0..30 {
            outcome.push(1.0);
            x.push(0.0);
        }
        for _ in 0..70 {
            outcome.push(0.0);
            x.push(0.0);
        }
        for _ in 0..60 {
            outcome.push(1.0);
            x.push(1.0);
        }
        for _ in 0..40 {
            outcome.push(0.0);
            x.push(1.0);
        }
        let n = outcome.len();
        let t = ObservationMatrix {
            outcome,
            covariates: vec![("x".into(), x)],
            fixed_effects: vec![],
            cluster: (0..n).map(|i| format!("c{i}")).collect(),
        };
        let fit = fe_logit(&t, FitOptions::default()).unwrap();
        assert!(fit.converged);
        let b0 = fit.coefficient("intercept").unwrap().estimate;
        let b1 = fit.coefficient("x").unwrap().estimate;
        let expected_b0 = (0.3f64 / 0.7).ln();
        let expected_b1 = (0.6f64 / 0.4).ln() - expected_b0;
        assert!((b0 - expected_b0).abs() < 1e-8);
        assert!((b1 - expected_b1).abs() < 1e-8);
    }

    #[test]
    fn per_row_clusters_equal_hc1() {
        let n = 80;
        let x: Vec<f64> = (0..n).map(|i| ((i * 13) % 17) as f64).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, &v)| v + ((i % 3) as f64) * 0.7).collect();
        let t = ols_table(y, x);

        let clustered = fe_ols(&t, FitOptions::default()).unwrap();
        let hc1 = fe_ols(&t, FitOptions { se: SeType::Hc1, ..Default::default() }).unwrap();
        for (a, b) in clustered.coefficients.iter().zip(hc1.coefficients.iter()) {
            assert!((a.se - b.se).abs() < 1e-8, "{}: {} vs {}", a.name, a.se, b.se);
        }
    }

    #[test]
    fn estimates_invariant_to_row_permutation_and_relabeling() {
        let n = 90;
        let x: Vec<f64> = (0..n).map(|i| ((i * 11) % 23) as f64 / 5.0).collect();
        let y: Vec<f64> =
            x.iter().enumerate().map(|(i, &v)| 1.0 + 0.8 * v + ((i % 4) as f64 - 1.5)).collect();
        let cluster: Vec<String> = (0..n).map(|i| format!("g{}", i % 6)).collect();
        let t = ObservationMatrix {
            outcome: y.clone(),
            covariates: vec![("x".into(), x.clone())],
            fixed_effects: vec![],
            cluster: cluster.clone(),
        };
        let base = fe_ols(&t, FitOptions::default()).unwrap();

        // Reverse rows and relabel clusters.
        let perm: Vec<usize> = (0..n).rev().collect();
        let t2 = ObservationMatrix {
            outcome: perm.iter().map(|&i| y[i]).collect(),
            covariates: vec![("x".into(), perm.iter().map(|&i| x[i]).collect())],
            fixed_effects: vec![],
            cluster: perm.iter().map(|&i| format!("renamed-{}", cluster[i])).collect(),
        };
        let permuted = fe_ols(&t2, FitOptions::default()).unwrap();
        for (a, b) in base.coefficients.iter().zip(permuted.coefficients.iter()) {
            assert!((a.estimate - b.estimate).abs() < 1e-8);
            assert!((a.se - b.se).abs() < 1e-8);
        }
    }
}
