//! Covariate residualization, median splits, and the TWFE comparison
//! estimator.

use std::collections::BTreeMap;

use nalgebra::Cholesky;
use serde::Serialize;

use crate::stats::{fe_ols, DesignMatrix, FitOptions, ObservationMatrix};

use super::{DidError, Panel, PanelObservation};

fn observation_table(
    observations: &[PanelObservation],
    covariate_names: &[String],
    extra: Option<(&str, Vec<f64>)>,
) -> ObservationMatrix {
    let mut covariates: Vec<(String, Vec<f64>)> = covariate_names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            (name.clone(), observations.iter().map(|o| o.covariates[k]).collect())
        })
        .collect();
    if let Some((name, col)) = extra {
        covariates.push((name.to_string(), col));
    }
    ObservationMatrix {
        outcome: observations.iter().map(|o| o.outcome).collect(),
        covariates,
        fixed_effects: vec![
            ("city".into(), observations.iter().map(|o| o.city.clone()).collect()),
            ("month".into(), observations.iter().map(|o| o.month.to_string()).collect()),
        ],
        cluster: observations.iter().map(|o| o.city.clone()).collect(),
    }
}

/// Replaces the outcome with the residual from an OLS of the outcome on the
/// panel covariates plus city and month fixed effects. Rows with missing
/// covariates leave the estimation sample (and the returned panel).
/// Returns the residualized panel and any collinear columns dropped.
pub fn residualize(panel: &Panel) -> Result<(Panel, Vec<String>), DidError> {
    let observations = panel.observations();
    let complete: Vec<&PanelObservation> =
        observations.iter().filter(|o| o.covariates.iter().all(|c| c.is_finite())).collect();
    if complete.is_empty() {
        return Err(DidError::Empty);
    }
    let rows: Vec<PanelObservation> = complete.iter().map(|o| (*o).clone()).collect();
    let table = observation_table(&rows, panel.covariate_names(), None);
    let design = DesignMatrix::build(&table)?;
    let gram = design.x.transpose() * &design.x;
    let chol = Cholesky::new(gram).ok_or_else(|| {
        DidError::Stats(crate::stats::StatsError::Degenerate("X'X not positive definite".into()))
    })?;
    let beta = chol.solve(&(design.x.transpose() * &design.y));
    let residuals = &design.y - &design.x * beta;

    let residualized: Vec<PanelObservation> = rows
        .iter()
        .zip(residuals.iter())
        .map(|(o, &r)| PanelObservation { outcome: r, covariates: vec![], ..o.clone() })
        .collect();
    let new_panel = Panel::from_observations(&residualized, &[])?;
    Ok((new_panel, design.dropped_columns.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwfeResult {
    pub estimate: f64,
    pub se: f64,
    pub p_value: f64,
    pub n_obs: usize,
    pub n_clusters: usize,
}

/// The two-way fixed-effects comparison estimator: OLS of the outcome on
/// the absorbing treatment indicator with city and month dummies,
/// city-clustered SE.
pub fn twfe_beta(panel: &Panel) -> Result<TwfeResult, DidError> {
    let observations = panel.observations();
    let treated: Vec<f64> = observations
        .iter()
        .map(|o| match o.cohort_month {
            Some(g) if o.month >= g => 1.0,
            _ => 0.0,
        })
        .collect();
    if treated.iter().all(|&d| d == 0.0) || treated.iter().all(|&d| d == 1.0) {
        return Err(DidError::NoWithinVariation);
    }
    let mut table = observation_table(&observations, &[], Some(("treated", treated)));
    table.covariates.retain(|(name, _)| name == "treated");
    let fit = fe_ols(&table, FitOptions::default())?;
    if fit.dropped_columns.iter().any(|c| c == "treated") {
        return Err(DidError::NoWithinVariation);
    }
    let coef = fit
        .coefficient("treated")
        .ok_or(DidError::NoWithinVariation)?;
    Ok(TwfeResult {
        estimate: coef.estimate,
        se: coef.se,
        p_value: coef.p_value,
        n_obs: fit.n_obs,
        n_clusters: fit.n_clusters,
    })
}

#[derive(Debug)]
pub struct MedianSplit {
    pub above: Panel,
    pub below: Panel,
    pub median: f64,
    /// Treated cities excluded for lack of a characteristic value.
    pub excluded: Vec<String>,
    /// True when every treated city landed in "above" (all values equal).
    pub degenerate: bool,
}

/// Splits treated cities at the median of a city-level characteristic (ties
/// to "above"); never-treated cities serve as controls in both sub-panels.
pub fn median_split(panel: &Panel, characteristic: &BTreeMap<String, f64>) -> Result<MedianSplit, DidError> {
    let mut treated_values: Vec<(String, f64)> = Vec::new();
    let mut excluded = Vec::new();
    for city in panel.city_names() {
        if panel.cohort_of(city).flatten().is_none() {
            continue;
        }
        match characteristic.get(city) {
            Some(&v) if v.is_finite() => treated_values.push((city.to_string(), v)),
            _ => excluded.push(city.to_string()),
        }
    }
    if treated_values.is_empty() {
        return Err(DidError::Empty);
    }
    let mut values: Vec<f64> = treated_values.iter().map(|(_, v)| *v).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let median =
        if n % 2 == 1 { values[n / 2] } else { (values[n / 2 - 1] + values[n / 2]) / 2.0 };

    let above_cities: Vec<&String> =
        treated_values.iter().filter(|(_, v)| *v >= median).map(|(c, _)| c).collect();
    let below_cities: Vec<&String> =
        treated_values.iter().filter(|(_, v)| *v < median).map(|(c, _)| c).collect();

    let keep = |names: &[&String]| {
        let owned: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        move |city: &str, cohort: Option<i32>| cohort.is_none() || owned.iter().any(|c| c == city)
    };
    let above = panel.subset_cities(&keep(&above_cities));
    let below = panel.subset_cities(&keep(&below_cities));
    let degenerate = below_cities.is_empty();
    Ok(MedianSplit { above, below, median, excluded, degenerate })
}
