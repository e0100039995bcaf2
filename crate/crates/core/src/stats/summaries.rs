//! Participation-by-age rates, repeat-participation summaries, and stance
//! aggregation.

use std::collections::BTreeMap;

use serde::Serialize;

/// Participation rate per age year: participants of age a over registered
/// voters of age a. Ages with a zero denominator come back as `None`.
pub fn participation_rate_by_age(
    voter_ages: &[u32],
    participant_ages: &[u32],
) -> BTreeMap<u32, Option<f64>> {
    let mut voters: BTreeMap<u32, usize> = BTreeMap::new();
    for &age in voter_ages {
        *voters.entry(age).or_insert(0) += 1;
    }
    let mut participants: BTreeMap<u32, usize> = BTreeMap::new();
    for &age in participant_ages {
        *participants.entry(age).or_insert(0) += 1;
    }
    let mut out = BTreeMap::new();
    for (&age, &denom) in &voters {
        let numer = participants.get(&age).copied().unwrap_or(0);
        out.insert(age, Some(numer as f64 / denom as f64));
    }
    for &age in participants.keys() {
        out.entry(age).or_insert(None);
    }
    out
}

/// Repeat-participation summary over per-(person, city) meeting counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatSummary {
    pub n_individuals: usize,
    pub one_timers: usize,
    pub repeaters: usize,
    pub one_timer_share: f64,
    pub repeater_share: f64,
    pub total_appearances: u64,
    pub one_timer_appearance_share: f64,
    pub repeater_appearance_share: f64,
    pub repeater_count_median: Option<f64>,
    pub repeater_count_mean: Option<f64>,
    pub repeater_count_sd: Option<f64>,
}

/// `counts`: meetings attended per unique (person, city), all >= 1.
pub fn repeat_summary(counts: &[u32]) -> RepeatSummary {
    let n = counts.len();
    let one_timers = counts.iter().filter(|&&c| c == 1).count();
    let repeaters = n - one_timers;
    let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    let repeat_appearances: u64 =
        counts.iter().filter(|&&c| c > 1).map(|&c| u64::from(c)).sum();

    let mut repeater_counts: Vec<f64> =
        counts.iter().filter(|&&c| c > 1).map(|&c| f64::from(c)).collect();
    repeater_counts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if repeater_counts.is_empty() {
        None
    } else {
        let m = repeater_counts.len();
        Some(if m % 2 == 1 {
            repeater_counts[m / 2]
        } else {
            (repeater_counts[m / 2 - 1] + repeater_counts[m / 2]) / 2.0
        })
    };
    let mean = if repeater_counts.is_empty() {
        None
    } else {
        Some(repeater_counts.iter().sum::<f64>() / repeater_counts.len() as f64)
    };
    let sd = match (repeater_counts.len(), mean) {
        (m, Some(mu)) if m >= 2 => Some(
            (repeater_counts.iter().map(|c| (c - mu).powi(2)).sum::<f64>() / (m as f64 - 1.0))
                .sqrt(),
        ),
        _ => None,
    };

    let share = |x: usize| if n == 0 { f64::NAN } else { x as f64 / n as f64 };
    let app_share = |x: u64| if total == 0 { f64::NAN } else { x as f64 / total as f64 };
    RepeatSummary {
        n_individuals: n,
        one_timers,
        repeaters,
        one_timer_share: share(one_timers),
        repeater_share: share(repeaters),
        total_appearances: total,
        one_timer_appearance_share: app_share(total - repeat_appearances),
        repeater_appearance_share: app_share(repeat_appearances),
        repeater_count_median: median,
        repeater_count_mean: mean,
        repeater_count_sd: sd,
    }
}

/// Moments and threshold shares for one group of stance scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StanceSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub share_pro: f64,
    pub share_anti: f64,
}

/// Summary for one group; `None` for an empty group. Pro/anti shares use the
/// +0.7 / -0.7 cutoffs.
pub fn stance_summary(scores: &[f64]) -> Option<StanceSummary> {
    if scores.is_empty() {
        return None;
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let sd = if scores.len() >= 2 {
        (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(StanceSummary {
        n: scores.len(),
        mean,
        sd,
        share_pro: scores.iter().filter(|&&s| s >= 0.7).count() as f64 / n,
        share_anti: scores.iter().filter(|&&s| s <= -0.7).count() as f64 / n,
    })
}

/// Group-and-summarize helper over (group key, score) pairs.
pub fn stance_summary_grouped<'a>(
    scored: impl IntoIterator<Item = (&'a str, f64)>,
) -> BTreeMap<String, StanceSummary> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (key, score) in scored {
        groups.entry(key.to_string()).or_default().push(score);
    }
    groups
        .into_iter()
        .filter_map(|(k, scores)| stance_summary(&scores).map(|s| (k, s)))
        .collect()
}
