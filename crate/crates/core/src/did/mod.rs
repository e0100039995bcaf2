//! Staggered-adoption difference-in-differences with group-time ATTs and
//! not-yet-treated controls.
//!
//! `ATT(g, t)` compares cohort-g cities' outcome change from the base month
//! `g-1` to month `t` against the same change among cities not yet treated
//! by `max(g, t)` (including never-treated cities). Post-period cells
//! (`t >= g`) are treatment effects; pre-period cells are the pseudo-ATTs
//! that feed the event-study pre-trend check.

mod adjust;
mod aggregate;
mod bootstrap;

pub use adjust::{median_split, residualize, twfe_beta, MedianSplit, TwfeResult};
pub use aggregate::{aggregate_event_study, aggregate_overall, EventStudy, EventStudyPoint, OverallAtt};
pub use bootstrap::{cluster_bootstrap, BootstrapSummary, DidAnalysis};

use std::collections::HashMap;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DidError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("panel header must start `city,month,cohort_month,outcome`, got `{0}`")]
    BadHeader(String),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("duplicate (city, month) row: ({city}, {month})")]
    DuplicateRow { city: String, month: i32 },
    #[error("city {0} has inconsistent cohort months across rows")]
    InconsistentCohort(String),
    #[error("panel has no observations")]
    Empty,
    #[error("cell (g={cohort}, t={period}) unidentifiable: {reason}")]
    Unidentifiable { cohort: i32, period: i32, reason: &'static str },
    #[error("no post-treatment cells are identified")]
    NoPostCells,
    #[error("treatment indicator has no within variation")]
    NoWithinVariation,
    #[error("{0}")]
    Stats(#[from] crate::stats::StatsError),
}

/// One city-month outcome row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelObservation {
    pub city: String,
    pub month: i32,
    /// First month with the treatment in force; `None` for never-treated.
    pub cohort_month: Option<i32>,
    pub outcome: f64,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone)]
struct CityData {
    name: String,
    cohort: Option<i32>,
    /// Outcome by month index; `None` where the city-month is unobserved.
    outcomes: Vec<Option<f64>>,
    /// covariates[k][month index]
    covariates: Vec<Vec<Option<f64>>>,
}

/// A balanced-indexed panel: cities by index, months as a sorted axis.
#[derive(Debug, Clone)]
pub struct Panel {
    cities: Vec<CityData>,
    months: Vec<i32>,
    month_index: HashMap<i32, usize>,
    covariate_names: Vec<String>,
}

impl Panel {
    pub fn from_observations(
        observations: &[PanelObservation],
        covariate_names: &[String],
    ) -> Result<Self, DidError> {
        if observations.is_empty() {
            return Err(DidError::Empty);
        }
        let mut months: Vec<i32> = observations.iter().map(|o| o.month).collect();
        months.sort_unstable();
        months.dedup();
        let month_index: HashMap<i32, usize> =
            months.iter().enumerate().map(|(i, &m)| (m, i)).collect();

        let k = covariate_names.len();
        let mut cities: Vec<CityData> = Vec::new();
        let mut city_index: HashMap<String, usize> = HashMap::new();
        for obs in observations {
            let idx = *city_index.entry(obs.city.clone()).or_insert_with(|| {
                cities.push(CityData {
                    name: obs.city.clone(),
                    cohort: obs.cohort_month,
                    outcomes: vec![None; months.len()],
                    covariates: vec![vec![None; months.len()]; k],
                });
                cities.len() - 1
            });
            let city = &mut cities[idx];
            if city.cohort != obs.cohort_month {
                return Err(DidError::InconsistentCohort(obs.city.clone()));
            }
            let m = month_index[&obs.month];
            if city.outcomes[m].is_some() {
                return Err(DidError::DuplicateRow { city: obs.city.clone(), month: obs.month });
            }
            city.outcomes[m] = Some(obs.outcome);
            for (slot, &value) in city.covariates.iter_mut().zip(obs.covariates.iter()) {
                slot[m] = Some(value);
            }
        }
        Ok(Panel { cities, months, month_index, covariate_names: covariate_names.to_vec() })
    }

    pub fn n_cities(&self) -> usize {
        self.cities.len()
    }

    pub fn months(&self) -> &[i32] {
        &self.months
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn city_names(&self) -> impl Iterator<Item = &str> {
        self.cities.iter().map(|c| c.name.as_str())
    }

    pub fn cohort_of(&self, city: &str) -> Option<Option<i32>> {
        self.cities.iter().find(|c| c.name == city).map(|c| c.cohort)
    }

    /// Distinct treatment cohorts, ascending.
    pub fn cohorts(&self) -> Vec<i32> {
        let mut cohorts: Vec<i32> = self.cities.iter().filter_map(|c| c.cohort).collect();
        cohorts.sort_unstable();
        cohorts.dedup();
        cohorts
    }

    /// All city indices, the default estimation sample.
    pub fn full_sample(&self) -> Vec<usize> {
        (0..self.cities.len()).collect()
    }

    fn outcome_at(&self, city: usize, month: i32) -> Option<f64> {
        let m = *self.month_index.get(&month)?;
        self.cities[city].outcomes[m]
    }

    /// Flattens back to observation rows (order: city index, then month).
    pub fn observations(&self) -> Vec<PanelObservation> {
        let mut out = Vec::new();
        for city in &self.cities {
            for (m, &month) in self.months.iter().enumerate() {
                if let Some(outcome) = city.outcomes[m] {
                    out.push(PanelObservation {
                        city: city.name.clone(),
                        month,
                        cohort_month: city.cohort,
                        outcome,
                        covariates: city.covariates.iter().map(|col| col[m].unwrap_or(f64::NAN)).collect(),
                    });
                }
            }
        }
        out
    }

    /// A panel restricted to the named cities.
    pub fn subset_cities(&self, keep: &dyn Fn(&str, Option<i32>) -> bool) -> Panel {
        let cities: Vec<CityData> =
            self.cities.iter().filter(|c| keep(&c.name, c.cohort)).cloned().collect();
        Panel {
            cities,
            months: self.months.clone(),
            month_index: self.month_index.clone(),
            covariate_names: self.covariate_names.clone(),
        }
    }
}

/// One estimated group-time cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTimeAtt {
    pub cohort: i32,
    pub period: i32,
    pub estimate: f64,
    /// Bootstrap SE when inference has run.
    pub se: Option<f64>,
    pub n_treated: usize,
    pub n_control: usize,
}

impl GroupTimeAtt {
    pub fn event_time(&self) -> i32 {
        self.period - self.cohort
    }
}

/// ATT(g, t) over the given city sample (indices may repeat under
/// bootstrap resampling). Cities missing either period drop out of the cell.
pub fn att_gt(panel: &Panel, sample: &[usize], cohort: i32, period: i32) -> Result<GroupTimeAtt, DidError> {
    let base = cohort - 1;
    // Controls must be untreated through both compared periods.
    let control_cutoff = cohort.max(period);

    let mut treated_sum = 0.0;
    let mut n_treated = 0usize;
    let mut control_sum = 0.0;
    let mut n_control = 0usize;

    for &ci in sample {
        let city = &panel.cities[ci];
        let delta = match (panel.outcome_at(ci, period), panel.outcome_at(ci, base)) {
            (Some(y_t), Some(y_base)) => y_t - y_base,
            _ => continue,
        };
        match city.cohort {
            Some(g) if g == cohort => {
                treated_sum += delta;
                n_treated += 1;
            }
            Some(g) if g > control_cutoff => {
                control_sum += delta;
                n_control += 1;
            }
            None => {
                control_sum += delta;
                n_control += 1;
            }
            _ => {}
        }
    }

    if n_treated == 0 {
        return Err(DidError::Unidentifiable { cohort, period, reason: "no treated cities observed" });
    }
    if n_control == 0 {
        return Err(DidError::Unidentifiable { cohort, period, reason: "empty control set" });
    }
    Ok(GroupTimeAtt {
        cohort,
        period,
        estimate: treated_sum / n_treated as f64 - control_sum / n_control as f64,
        se: None,
        n_treated,
        n_control,
    })
}

/// Every identified cell over the sample: all cohorts crossed with all
/// panel months except each cohort's base month.
pub fn compute_cells(panel: &Panel, sample: &[usize]) -> Vec<GroupTimeAtt> {
    let mut cohorts: Vec<i32> =
        sample.iter().filter_map(|&ci| panel.cities[ci].cohort).collect();
    cohorts.sort_unstable();
    cohorts.dedup();

    let mut cells = Vec::new();
    for &g in &cohorts {
        for &t in &panel.months {
            if t == g - 1 {
                continue; // base month: identically zero by construction
            }
            if let Ok(cell) = att_gt(panel, sample, g, t) {
                cells.push(cell);
            }
        }
    }
    cells
}

pub const PANEL_CSV_PREFIX: [&str; 4] = ["city", "month", "cohort_month", "outcome"];

/// Reads `city,month,cohort_month,outcome,cov...` rows; any columns after
/// `outcome` are covariates named by the header. Empty cohort_month means
/// never treated; rows with an empty outcome are skipped.
pub fn read_panel_csv<R: io::Read>(reader: R) -> Result<(Vec<PanelObservation>, Vec<String>), DidError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 4 || headers[..4] != PANEL_CSV_PREFIX {
        return Err(DidError::BadHeader(headers.join(",")));
    }
    let covariate_names: Vec<String> = headers[4..].to_vec();

    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let get = |idx: usize| record.get(idx).unwrap_or("").trim().to_string();
        let month: i32 = get(1)
            .parse()
            .map_err(|_| DidError::BadRow { row, message: format!("bad month `{}`", get(1)) })?;
        let cohort_raw = get(2);
        let cohort_month = if cohort_raw.is_empty() {
            None
        } else {
            Some(cohort_raw.parse().map_err(|_| DidError::BadRow {
                row,
                message: format!("bad cohort_month `{cohort_raw}`"),
            })?)
        };
        let outcome_raw = get(3);
        if outcome_raw.is_empty() {
            continue;
        }
        let outcome: f64 = outcome_raw
            .parse()
            .map_err(|_| DidError::BadRow { row, message: format!("bad outcome `{outcome_raw}`") })?;
        let mut covariates = Vec::with_capacity(covariate_names.len());
        for j in 0..covariate_names.len() {
            let raw = get(4 + j);
            if raw.is_empty() {
                covariates.push(f64::NAN);
            } else {
                covariates.push(raw.parse().map_err(|_| DidError::BadRow {
                    row,
                    message: format!("bad covariate `{raw}`"),
                })?);
            }
        }
        out.push(PanelObservation { city: get(0), month, cohort_month, outcome, covariates });
    }
    if out.is_empty() {
        return Err(DidError::Empty);
    }
    Ok((out, covariate_names))
}


#[cfg(test)]
mod tests {
    use super::test_support::panel_from;
    use super::*;

    #[test]
    fn canonical_two_by_two() {
        // Treated city jumps by 5, control by 2: ATT = 3.
        let panel = panel_from(&[
            ("treated", Some(1), vec![10.0, 15.0]),
            ("control", None, vec![7.0, 9.0]),
        ]);
        let cell = att_gt(&panel, &panel.full_sample(), 1, 1).unwrap();
        assert_eq!(cell.estimate, 3.0);
        assert_eq!(cell.n_treated, 1);
        assert_eq!(cell.n_control, 1);
    }

    #[test]
    fn constant_effect_recovered_in_every_post_cell() {
        // Two cohorts, effect +2 from adoption onward, no noise.
        let mut rows: Vec<(&str, Option<i32>, Vec<f64>)> = Vec::new();
        let trend = |t: usize| 0.5 * t as f64;
        rows.push(("early", Some(2), (0..6).map(|t| trend(t) + if t >= 2 { 2.0 } else { 0.0 }).collect()));
        rows.push(("late", Some(4), (0..6).map(|t| trend(t) + if t >= 4 { 2.0 } else { 0.0 }).collect()));
        rows.push(("never", None, (0..6).map(trend).collect()));
        let panel = panel_from(&rows);

        for cell in compute_cells(&panel, &panel.full_sample()) {
            let expected = if cell.period >= cell.cohort { 2.0 } else { 0.0 };
            assert!(
                (cell.estimate - expected).abs() < 1e-12,
                "cell ({}, {}) = {}",
                cell.cohort,
                cell.period,
                cell.estimate
            );
        }
    }

    #[test]
    fn pre_period_cells_clean_under_heterogeneous_effects() {
        // The early cohort's effect must not leak into the late cohort's
        // pre-period cells through a contaminated control set.
        let mut rows: Vec<(&str, Option<i32>, Vec<f64>)> = Vec::new();
        rows.push(("early", Some(1), (0..6).map(|t| if t >= 1 { 10.0 } else { 0.0 }).collect()));
        rows.push(("late", Some(5), (0..6).map(|t| if t >= 5 { 1.0 } else { 0.0 }).collect()));
        rows.push(("never", None, vec![0.0; 6]));
        let panel = panel_from(&rows);

        // Pre-period pseudo-ATT for the late cohort at t = 2 (base month 4):
        // early is treated in both, so only "never" is a valid control.
        let cell = att_gt(&panel, &panel.full_sample(), 5, 2).unwrap();
        assert_eq!(cell.estimate, 0.0);
        assert_eq!(cell.n_control, 1);
    }

    #[test]
    fn unidentified_cells_error() {
        let panel = panel_from(&[
            ("treated", Some(1), vec![0.0, 1.0]),
            ("also_treated", Some(1), vec![0.0, 1.0]),
        ]);
        assert!(matches!(
            att_gt(&panel, &panel.full_sample(), 1, 1),
            Err(DidError::Unidentifiable { reason: "empty control set", .. })
        ));
    }

    #[test]
    fn city_and_month_shifts_leave_cells_unchanged() {
        let base = panel_from(&[
            ("a", Some(2), vec![1.0, 2.0, 6.0, 7.0]),
            ("b", None, vec![0.0, 1.0, 2.0, 3.0]),
            ("c", None, vec![5.0, 5.5, 6.0, 6.5]),
        ]);
        let cells_base = compute_cells(&base, &base.full_sample());

        // Shift city c by +100 and every month t by +3t.
        let shifted = panel_from(&[
            ("a", Some(2), vec![1.0, 5.0, 12.0, 16.0]),
            ("b", None, vec![0.0, 4.0, 8.0, 12.0]),
            ("c", None, vec![105.0, 108.5, 112.0, 115.5]),
        ]);
        let cells_shifted = compute_cells(&shifted, &shifted.full_sample());
        for (a, b) in cells_base.iter().zip(cells_shifted.iter()) {
            assert_eq!((a.cohort, a.period), (b.cohort, b.period));
            assert!((a.estimate - b.estimate).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_months_drop_cities_from_cells() {
        let obs = vec![
            PanelObservation { city: "t".into(), month: 0, cohort_month: Some(1), outcome: 1.0, covariates: vec![] },
            PanelObservation { city: "t".into(), month: 1, cohort_month: Some(1), outcome: 4.0, covariates: vec![] },
            PanelObservation { city: "c1".into(), month: 0, cohort_month: None, outcome: 0.0, covariates: vec![] },
            PanelObservation { city: "c1".into(), month: 1, cohort_month: None, outcome: 1.0, covariates: vec![] },
            // c2 is missing month 0, so it cannot enter the (1,1) cell.
            PanelObservation { city: "c2".into(), month: 1, cohort_month: None, outcome: 50.0, covariates: vec![] },
        ];
        let panel = Panel::from_observations(&obs, &[]).unwrap();
        let cell = att_gt(&panel, &panel.full_sample(), 1, 1).unwrap();
        assert_eq!(cell.n_control, 1);
        assert_eq!(cell.estimate, 3.0 - 1.0);
    }

    #[test]
    fn duplicate_and_inconsistent_rows_rejected() {
        let dup = vec![
            PanelObservation { city: "a".into(), month: 0, cohort_month: None, outcome: 1.0, covariates: vec![] },
            PanelObservation { city: "a".into(), month: 0, cohort_month: None, outcome: 2.0, covariates: vec![] },
        ];
        assert!(matches!(Panel::from_observations(&dup, &[]), Err(DidError::DuplicateRow { .. })));

        let inconsistent = vec![
            PanelObservation { city: "a".into(), month: 0, cohort_month: Some(1), outcome: 1.0, covariates: vec![] },
            PanelObservation { city: "a".into(), month: 1, cohort_month: Some(2), outcome: 2.0, covariates: vec![] },
        ];
        assert!(matches!(
            Panel::from_observations(&inconsistent, &[]),
            Err(DidError::InconsistentCohort(_))
        ));
    }

    #[test]
    fn panel_csv_round_trip() {
        let csv = "city,month,cohort_month,outcome,share_a\nalpha,0,,1.5,0.2\nalpha,1,,1.7,0.3\nbravo,0,1,2.0,\nbravo,1,1,4.0,0.5\n";
        let (obs, names) = read_panel_csv(csv.as_bytes()).unwrap();
        assert_eq!(names, vec!["share_a"]);
        assert_eq!(obs.len(), 4);
        assert_eq!(obs[2].cohort_month, Some(1));
        assert!(obs[2].covariates[0].is_nan());
        let panel = Panel::from_observations(&obs, &names).unwrap();
        assert_eq!(panel.n_cities(), 2);
        assert_eq!(panel.cohorts(), vec![1]);

        let bad = "town,month,cohort_month,outcome\n";
        assert!(matches!(read_panel_csv(bad.as_bytes()), Err(DidError::BadHeader(_))));
    }
}
