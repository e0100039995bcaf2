//! City-level cluster bootstrap for the group-time estimator.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::aggregate::{aggregate_event_study, aggregate_overall, EventStudy, OverallAtt};
use super::{compute_cells, DidError, GroupTimeAtt, Panel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub n_draws: usize,
    pub seed: u64,
    /// Statistics undefined in more than 10% of draws.
    pub flagged: Vec<String>,
}

/// Full analysis bundle: point estimates with bootstrap SEs and percentile
/// confidence intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DidAnalysis {
    pub cells: Vec<GroupTimeAtt>,
    pub event_study: EventStudy,
    pub overall: OverallAtt,
    pub bootstrap: BootstrapSummary,
}

fn sd(draws: &[f64]) -> Option<f64> {
    if draws.len() < 2 {
        return None;
    }
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    Some((draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn ci(draws: &mut Vec<f64>) -> Option<(f64, f64)> {
    if draws.len() < 2 {
        return None;
    }
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some((percentile(draws, 0.025), percentile(draws, 0.975)))
}

/// Resamples cities with replacement `n_draws` times, recomputing every
/// cell and both aggregates per draw. Deterministic for a given seed: each
/// draw uses its own pre-derived ChaCha stream, so scheduling cannot change
/// results.
pub fn cluster_bootstrap(panel: &Panel, n_draws: usize, seed: u64) -> Result<DidAnalysis, DidError> {
    let sample = panel.full_sample();
    let mut cells = compute_cells(panel, &sample);
    if cells.is_empty() {
        return Err(DidError::NoPostCells);
    }
    let mut event_study = aggregate_event_study(&cells);
    let mut overall = aggregate_overall(&cells)?;

    let n_cities = panel.n_cities();
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let draw_seeds: Vec<u64> = (0..n_draws).map(|_| master.random()).collect();

    let mut cell_draws: BTreeMap<(i32, i32), Vec<f64>> = BTreeMap::new();
    let mut event_draws: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    let mut overall_draws: Vec<f64> = Vec::with_capacity(n_draws);

    for draw_seed in draw_seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(draw_seed);
        let resample: Vec<usize> =
            (0..n_cities).map(|_| rng.random_range(0..n_cities)).collect();
        let draw_cells = compute_cells(panel, &resample);
        if draw_cells.is_empty() {
            continue;
        }
        for cell in &draw_cells {
            cell_draws.entry((cell.cohort, cell.period)).or_default().push(cell.estimate);
        }
        let study = aggregate_event_study(&draw_cells);
        for point in study.points.values() {
            event_draws.entry(point.event_time).or_default().push(point.estimate);
        }
        if let Ok(o) = aggregate_overall(&draw_cells) {
            overall_draws.push(o.estimate);
        }
    }

    let mut flagged = Vec::new();
    let defined_floor = (n_draws as f64 * 0.9) as usize;

    for cell in &mut cells {
        let draws = cell_draws.remove(&(cell.cohort, cell.period)).unwrap_or_default();
        if draws.len() < defined_floor {
            flagged.push(format!("att({},{})", cell.cohort, cell.period));
        }
        cell.se = sd(&draws);
    }
    for point in event_study.points.values_mut() {
        if point.event_time == -1 {
            point.se = Some(0.0);
            point.ci_lower = Some(0.0);
            point.ci_upper = Some(0.0);
            continue;
        }
        let mut draws = event_draws.remove(&point.event_time).unwrap_or_default();
        if draws.len() < defined_floor {
            flagged.push(format!("event({})", point.event_time));
        }
        point.se = sd(&draws);
        if let Some((lo, hi)) = ci(&mut draws) {
            point.ci_lower = Some(lo);
            point.ci_upper = Some(hi);
        }
    }
    if overall_draws.len() < defined_floor {
        flagged.push("overall".into());
    }
    overall.se = sd(&overall_draws);
    if let Some((lo, hi)) = ci(&mut overall_draws) {
        overall.ci_lower = Some(lo);
        overall.ci_upper = Some(hi);
    }

    Ok(DidAnalysis {
        cells,
        event_study,
        overall,
        bootstrap: BootstrapSummary { n_draws, seed, flagged },
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::panel_from;
    use super::*;

    fn toy_panel() -> Panel {
        panel_from(&[
            ("a", Some(2), vec![1.0, 1.5, 4.0, 4.5]),
            ("b", Some(2), vec![0.0, 0.5, 3.2, 3.6]),
            ("c", None, vec![2.0, 2.5, 3.0, 3.5]),
            ("d", None, vec![1.0, 1.4, 1.9, 2.4]),
            ("e", None, vec![0.5, 1.1, 1.6, 2.0]),
        ])
    }

    #[test]
    fn same_seed_twice_is_identical() {
        let panel = toy_panel();
        let a = cluster_bootstrap(&panel, 50, 42).unwrap();
        let b = cluster_bootstrap(&panel, 50, 42).unwrap();
        assert_eq!(a, b);
        let c = cluster_bootstrap(&panel, 50, 43).unwrap();
        assert_ne!(a.overall.se, c.overall.se);
    }

    #[test]
    fn constant_statistic_has_zero_se() {
        // Identical trends everywhere: every draw yields the same cells.
        let panel = panel_from(&[
            ("a", Some(1), vec![0.0, 1.0]),
            ("b", Some(1), vec![5.0, 6.0]),
            ("c", None, vec![2.0, 3.0]),
            ("d", None, vec![7.0, 8.0]),
        ]);
        let analysis = cluster_bootstrap(&panel, 100, 7).unwrap();
        assert!(analysis.overall.se.unwrap() < 1e-12);
    }

    #[test]
    fn reference_period_pinned_to_zero() {
        let analysis = cluster_bootstrap(&toy_panel(), 30, 1).unwrap();
        let p = &analysis.event_study.points[&-1];
        assert_eq!(p.estimate, 0.0);
        assert_eq!(p.se, Some(0.0));
    }
}
