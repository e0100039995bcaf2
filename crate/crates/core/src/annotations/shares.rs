//! Per-meeting topic shares of speaking time and agendized issue proportions.

use std::collections::BTreeMap;

use super::IssueAnnotation;

#[derive(Debug, Clone, PartialEq)]
pub struct TopicShareWarning {
    pub issue: String,
    pub reason: &'static str,
}

/// Share of issue time per topic, over issues whose `agendized` flag equals
/// `agendized_filter`. Issues without timestamps or topic assignment are
/// excluded from the denominator and reported as warnings.
pub fn topic_shares(
    issues: &[IssueAnnotation],
    agendized_filter: bool,
) -> (BTreeMap<u8, f64>, Vec<TopicShareWarning>) {
    let mut warnings = Vec::new();
    let mut durations: BTreeMap<u8, f64> = BTreeMap::new();
    let mut total = 0.0_f64;

    for issue in issues.iter().filter(|i| i.agendized == agendized_filter) {
        let span = match (issue.timestamp_start, issue.timestamp_end) {
            (Some(s), Some(e)) => f64::from(e.seconds().saturating_sub(s.seconds())),
            _ => {
                warnings.push(TopicShareWarning { issue: issue.issue.clone(), reason: "missing timestamps" });
                continue;
            }
        };
        let Some(topic) = issue.topic_id else {
            warnings.push(TopicShareWarning { issue: issue.issue.clone(), reason: "unassigned topic" });
            continue;
        };
        *durations.entry(topic).or_insert(0.0) += span;
        total += span;
    }

    if total <= 0.0 {
        return (BTreeMap::new(), warnings);
    }
    let shares = durations.into_iter().map(|(t, d)| (t, d / total)).collect();
    (shares, warnings)
}

/// Count-based topic proportions among agendized issues.
pub fn agenda_topic_proportions(issues: &[IssueAnnotation]) -> BTreeMap<u8, f64> {
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    let mut total = 0usize;
    for issue in issues.iter().filter(|i| i.agendized) {
        if let Some(topic) = issue.topic_id {
            *counts.entry(topic).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return BTreeMap::new();
    }
    counts.into_iter().map(|(t, c)| (t, c as f64 / total as f64)).collect()
}
