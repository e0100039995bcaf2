//! Event-study and overall aggregation of group-time cells with
//! city-count weights.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{DidError, GroupTimeAtt};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventStudyPoint {
    pub event_time: i32,
    pub estimate: f64,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    /// Cohort cells contributing to this event time.
    pub n_cells: usize,
}

/// Dynamic ATTs by event time; the reference period e = -1 is identically 0.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct EventStudy {
    pub points: BTreeMap<i32, EventStudyPoint>,
}

impl EventStudy {
    pub fn estimate_at(&self, event_time: i32) -> Option<f64> {
        self.points.get(&event_time).map(|p| p.estimate)
    }

    pub fn pre_periods(&self) -> impl Iterator<Item = &EventStudyPoint> {
        self.points.values().filter(|p| p.event_time < -1)
    }
}

/// Cohort-size-weighted average of ATT(g, g+e) per event time e. Weights
/// are proportional to the number of treated cities in each contributing
/// cell and sum to one within the event time.
pub fn aggregate_event_study(cells: &[GroupTimeAtt]) -> EventStudy {
    let mut grouped: BTreeMap<i32, Vec<&GroupTimeAtt>> = BTreeMap::new();
    for cell in cells {
        grouped.entry(cell.event_time()).or_default().push(cell);
    }
    let mut points = BTreeMap::new();
    for (e, group) in grouped {
        let total: f64 = group.iter().map(|c| c.n_treated as f64).sum();
        let estimate: f64 =
            group.iter().map(|c| c.estimate * c.n_treated as f64).sum::<f64>() / total;
        points.insert(
            e,
            EventStudyPoint {
                event_time: e,
                estimate,
                se: None,
                ci_lower: None,
                ci_upper: None,
                n_cells: group.len(),
            },
        );
    }
    // The base period is zero by construction.
    points.insert(
        -1,
        EventStudyPoint { event_time: -1, estimate: 0.0, se: None, ci_lower: None, ci_upper: None, n_cells: 0 },
    );
    EventStudy { points }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverallAtt {
    pub estimate: f64,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub n_cells: usize,
}

/// Weighted average over post-treatment cells (t >= g) with weights
/// proportional to cohort size (treated-city count) per observed post
/// period; weights are non-negative and sum to one.
pub fn aggregate_overall(cells: &[GroupTimeAtt]) -> Result<OverallAtt, DidError> {
    let post: Vec<&GroupTimeAtt> = cells.iter().filter(|c| c.period >= c.cohort).collect();
    if post.is_empty() {
        return Err(DidError::NoPostCells);
    }
    let total: f64 = post.iter().map(|c| c.n_treated as f64).sum();
    let estimate = post.iter().map(|c| c.estimate * c.n_treated as f64).sum::<f64>() / total;
    Ok(OverallAtt { estimate, se: None, ci_lower: None, ci_upper: None, n_cells: post.len() })
}
