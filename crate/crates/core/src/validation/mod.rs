//! Machine-vs-human validation: interval IoU, token-sort similarity, greedy
//! issue matching, confusion matrices, and set-level precision/recall.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::VoteTally;
use crate::transcript::TimeStamp;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("confusion matrix needs at least one labeled pair")]
    EmptyInput,
}

/// Interval intersection-over-union:
/// `max(0, min(e_a, e_b) - max(s_a, s_b)) / (max(e_a, e_b) - min(s_a, s_b))`,
/// 0 when the union has zero length.
pub fn interval_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let intersection = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = a.1.max(b.1) - a.0.min(b.0);
    if union <= 0.0 {
        0.0
    } else {
        intersection / union
    }
}

/// Longest common subsequence length over chars.
fn lcs_len(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            curr[j + 1] = if ca == cb { prev[j] + 1 } else { prev[j + 1].max(curr[j]) };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Normalized indel similarity in [0, 1]: `2*LCS / (|a| + |b|)`, i.e. one
/// minus the normalized insertion/deletion distance.
pub fn indel_similarity(a: &str, b: &str) -> f64 {
    let a_chars: Vec<char> = a.chars().collect();
    let b_chars: Vec<char> = b.chars().collect();
    let total = a_chars.len() + b_chars.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * lcs_len(&a_chars, &b_chars) as f64 / total as f64
}

/// Token-sort ratio on a 0-100 scale: lowercase, sort whitespace tokens,
/// join with single spaces, then normalized indel similarity times 100.
pub fn token_sort_ratio(a: &str, b: &str) -> f64 {
    let sort_join = |s: &str| {
        let lowered = s.to_lowercase();
        let mut tokens: Vec<&str> = lowered.split_whitespace().collect();
        tokens.sort_unstable();
        tokens.join(" ")
    };
    100.0 * indel_similarity(&sort_join(a), &sort_join(b))
}

/// Character-level ratio (0-100) on the final whitespace token of each name,
/// unsorted; used for last-name agreement.
pub fn last_token_ratio(a: &str, b: &str) -> f64 {
    let last = |s: &str| s.split_whitespace().last().unwrap_or("").to_lowercase();
    100.0 * indel_similarity(&last(a), &last(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Ra,
    Llm,
}

/// A human- or machine-labeled issue used in the greedy matcher.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledIssue {
    pub source: LabelSource,
    pub title: String,
    pub start: Option<TimeStamp>,
    pub end: Option<TimeStamp>,
    pub agendized: Option<bool>,
    pub vote: Option<bool>,
    pub vote_res: Option<VoteTally>,
    pub vote_stage: Option<String>,
}

/// One accepted RA/LLM issue pair with its component scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationPair {
    pub ra_index: usize,
    pub llm_index: usize,
    pub iou: f64,
    /// Title similarity rescaled to [0, 1].
    pub title_sim: f64,
    /// `0.7 * iou + 0.3 * title_sim`.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyMatchOutcome {
    pub pairs: Vec<ValidationPair>,
    pub ra_only: Vec<usize>,
    pub llm_only: Vec<usize>,
}

/// The acceptance gate: timestamp IoU of at least 0.3 or title similarity
/// (0-100 scale) of at least 60.
pub fn passes_match_gate(iou: f64, title_sim_0_100: f64) -> bool {
    iou >= 0.3 || title_sim_0_100 >= 60.0
}

fn issue_interval(issue: &LabeledIssue) -> Option<(f64, f64)> {
    match (issue.start, issue.end) {
        (Some(s), Some(e)) => Some((f64::from(s.seconds()), f64::from(e.seconds()))),
        _ => None,
    }
}

/// Greedy best-first one-to-one matching of RA issues to LLM issues.
///
/// All cross pairs are scored `0.7*IoU + 0.3*TitleSim`, sorted by descending
/// score with ties broken by ascending (ra index, llm index), and accepted
/// greedily when both sides are free and the gate passes. Issues missing
/// timestamps get IoU 0 and can only match through the title gate.
pub fn greedy_issue_match(ra: &[LabeledIssue], llm: &[LabeledIssue]) -> GreedyMatchOutcome {
    struct Scored {
        ra: usize,
        llm: usize,
        iou: f64,
        title_0_100: f64,
        score: f64,
    }

    let mut scored = Vec::with_capacity(ra.len() * llm.len());
    for (i, r) in ra.iter().enumerate() {
        for (j, l) in llm.iter().enumerate() {
            let iou = match (issue_interval(r), issue_interval(l)) {
                (Some(a), Some(b)) => interval_iou(a, b),
                _ => 0.0,
            };
            let title_0_100 = token_sort_ratio(&r.title, &l.title);
            let score = 0.7 * iou + 0.3 * (title_0_100 / 100.0);
            scored.push(Scored { ra: i, llm: j, iou, title_0_100, score });
        }
    }
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.ra.cmp(&b.ra))
            .then(a.llm.cmp(&b.llm))
    });

    let mut ra_used = vec![false; ra.len()];
    let mut llm_used = vec![false; llm.len()];
    let mut pairs = Vec::new();
    for s in scored {
        if ra_used[s.ra] || llm_used[s.llm] || !passes_match_gate(s.iou, s.title_0_100) {
            continue;
        }
        ra_used[s.ra] = true;
        llm_used[s.llm] = true;
        pairs.push(ValidationPair {
            ra_index: s.ra,
            llm_index: s.llm,
            iou: s.iou,
            title_sim: s.title_0_100 / 100.0,
            score: s.score,
        });
    }

    let ra_only = (0..ra.len()).filter(|&i| !ra_used[i]).collect();
    let llm_only = (0..llm.len()).filter(|&j| !llm_used[j]).collect();
    GreedyMatchOutcome { pairs, ra_only, llm_only }
}

/// Cross-tabulation of (truth, predicted) labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    /// Sorted union of observed labels.
    pub labels: Vec<String>,
    /// counts[(truth, predicted)]
    pub counts: BTreeMap<(String, String), usize>,
    pub total: usize,
}

impl ConfusionMatrix {
    pub fn count(&self, truth: &str, predicted: &str) -> usize {
        self.counts.get(&(truth.to_string(), predicted.to_string())).copied().unwrap_or(0)
    }

    pub fn truth_total(&self, truth: &str) -> usize {
        self.counts.iter().filter(|((t, _), _)| t == truth).map(|(_, c)| c).sum()
    }

    pub fn predicted_total(&self, predicted: &str) -> usize {
        self.counts.iter().filter(|((_, p), _)| p == predicted).map(|(_, c)| c).sum()
    }

    fn diagonal(&self) -> usize {
        self.counts.iter().filter(|((t, p), _)| t == p).map(|(_, c)| c).sum()
    }

    /// Trace over the full total.
    pub fn agreement_overall(&self) -> f64 {
        self.diagonal() as f64 / self.total as f64
    }

    /// Trace over rows whose truth label is in `truth_subset`.
    pub fn agreement_over(&self, truth_subset: &[&str]) -> f64 {
        let numer: usize = self
            .counts
            .iter()
            .filter(|((t, p), _)| t == p && truth_subset.contains(&t.as_str()))
            .map(|(_, c)| c)
            .sum();
        let denom: usize = self
            .counts
            .iter()
            .filter(|((t, _), _)| truth_subset.contains(&t.as_str()))
            .map(|(_, c)| c)
            .sum();
        numer as f64 / denom as f64
    }
}

pub fn confusion_matrix<'a>(
    pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<ConfusionMatrix, ValidationError> {
    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut total = 0;
    for (truth, predicted) in pairs {
        *counts.entry((truth.to_string(), predicted.to_string())).or_insert(0) += 1;
        total += 1;
        for l in [truth, predicted] {
            if !labels.iter().any(|x| x == l) {
                labels.push(l.to_string());
            }
        }
    }
    if total == 0 {
        return Err(ValidationError::EmptyInput);
    }
    labels.sort();
    Ok(ConfusionMatrix { labels, counts, total })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameMatchMode {
    /// Token-sort ratio over the full name.
    Full,
    /// Character-level ratio over the final token only.
    Last,
}

fn name_similarity(a: &str, b: &str, mode: NameMatchMode) -> f64 {
    match mode {
        NameMatchMode::Full => token_sort_ratio(a, b),
        NameMatchMode::Last => last_token_ratio(a, b),
    }
}

/// Set-level counts for one meeting: a name counts as matched when any name
/// in the other set reaches the fuzzy threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct SetMatchCounts {
    pub matched_llm: usize,
    pub total_llm: usize,
    pub matched_ra: usize,
    pub total_ra: usize,
}

impl SetMatchCounts {
    pub fn precision(&self) -> f64 {
        self.matched_llm as f64 / self.total_llm as f64
    }

    pub fn recall(&self) -> f64 {
        self.matched_ra as f64 / self.total_ra as f64
    }

    pub fn add(&mut self, other: SetMatchCounts) {
        self.matched_llm += other.matched_llm;
        self.total_llm += other.total_llm;
        self.matched_ra += other.matched_ra;
        self.total_ra += other.total_ra;
    }
}

pub fn set_precision_recall(
    ra_names: &[String],
    llm_names: &[String],
    threshold: f64,
    mode: NameMatchMode,
) -> SetMatchCounts {
    let matched = |name: &str, others: &[String]| {
        others.iter().any(|o| name_similarity(name, o, mode) >= threshold)
    };
    SetMatchCounts {
        matched_llm: llm_names.iter().filter(|n| matched(n, ra_names)).count(),
        total_llm: llm_names.len(),
        matched_ra: ra_names.iter().filter(|n| matched(n, llm_names)).count(),
        total_ra: ra_names.len(),
    }
}

/// Agreement summary over speakers where both sides produced a name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NameAgreement {
    pub n_pairs: usize,
    pub exact_matches: usize,
    pub fuzzy_matches: usize,
    pub threshold: f64,
    pub mean_similarity: f64,
    pub median_similarity: f64,
    pub last_exact_matches: usize,
    pub mean_last_similarity: f64,
    pub median_last_similarity: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Per-pair name agreement at the given fuzzy threshold (0-100 scale).
pub fn name_agreement(pairs: &[(String, String)], threshold: f64) -> NameAgreement {
    let mut sims = Vec::with_capacity(pairs.len());
    let mut last_sims = Vec::with_capacity(pairs.len());
    let mut exact = 0;
    let mut fuzzy = 0;
    let mut last_exact = 0;
    for (a, b) in pairs {
        let sim = token_sort_ratio(a, b);
        let last_sim = last_token_ratio(a, b);
        if a.to_lowercase() == b.to_lowercase() {
            exact += 1;
        }
        if sim >= threshold {
            fuzzy += 1;
        }
        if last_sim >= 100.0 {
            last_exact += 1;
        }
        sims.push(sim);
        last_sims.push(last_sim);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len().max(1) as f64;
    NameAgreement {
        n_pairs: pairs.len(),
        exact_matches: exact,
        fuzzy_matches: fuzzy,
        threshold,
        mean_similarity: mean(&sims),
        median_similarity: median(&mut sims.clone()),
        last_exact_matches: last_exact,
        mean_last_similarity: mean(&last_sims),
        median_last_similarity: median(&mut last_sims.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GovLabel {
    G,
    NG,
    NA,
}

impl GovLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GovLabel::G => "G",
            GovLabel::NG => "NG",
            GovLabel::NA => "NA",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "G" => Some(GovLabel::G),
            "NG" => Some(GovLabel::NG),
            "NA" | "" => Some(GovLabel::NA),
            _ => None,
        }
    }
}

/// One human-labeled speaker row aligned with the machine annotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSpeaker {
    pub speaker_id: String,
    pub ra_name: Option<String>,
    pub llm_name: Option<String>,
    pub ra_gov: GovLabel,
    pub llm_gov: GovLabel,
}

/// Reads `speaker_id,ra_name,llm_name,ra_gov,llm_gov` rows; empty or "NA"
/// names are missing.
pub fn read_labeled_speakers<R: io::Read>(reader: R) -> Result<Vec<LabeledSpeaker>, ValidationError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let get = |idx: usize| record.get(idx).unwrap_or("").trim().to_string();
        let name = |s: String| if s.is_empty() || s == "NA" { None } else { Some(s) };
        let gov = |s: String| {
            GovLabel::parse(&s)
                .ok_or_else(|| ValidationError::BadRow { row, message: format!("bad gov label `{s}`") })
        };
        out.push(LabeledSpeaker {
            speaker_id: get(0),
            ra_name: name(get(1)),
            llm_name: name(get(2)),
            ra_gov: gov(get(3))?,
            llm_gov: gov(get(4))?,
        });
    }
    Ok(out)
}

/// Reads `source,title,start,end,agendized,vote,vote_res,vote_stage` rows.
pub fn read_labeled_issues<R: io::Read>(reader: R) -> Result<Vec<LabeledIssue>, ValidationError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let get = |idx: usize| record.get(idx).unwrap_or("").trim().to_string();
        let source = match get(0).as_str() {
            "ra" => LabelSource::Ra,
            "llm" => LabelSource::Llm,
            other => {
                return Err(ValidationError::BadRow { row, message: format!("bad source `{other}`") })
            }
        };
        let ts = |s: String| -> Result<Option<TimeStamp>, ValidationError> {
            if s.is_empty() {
                Ok(None)
            } else {
                TimeStamp::parse(&s)
                    .map(Some)
                    .map_err(|e| ValidationError::BadRow { row, message: e.to_string() })
            }
        };
        let flag = |s: String| -> Result<Option<bool>, ValidationError> {
            match s.as_str() {
                "" => Ok(None),
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                other => {
                    Err(ValidationError::BadRow { row, message: format!("bad bool `{other}`") })
                }
            }
        };
        let vote_res = {
            let s = get(6);
            if s.is_empty() {
                None
            } else {
                crate::annotations::parse_vote_result(&s)
                    .map_err(|e| ValidationError::BadRow { row, message: e.to_string() })?
            }
        };
        let start = ts(get(2))?;
        let end = ts(get(3))?;
        if let (Some(s), Some(e)) = (start, end) {
            if e < s {
                return Err(ValidationError::BadRow { row, message: "end precedes start".into() });
            }
        }
        let stage = get(7);
        out.push(LabeledIssue {
            source,
            title: get(1),
            start,
            end,
            agendized: flag(get(4))?,
            vote: flag(get(5))?,
            vote_res,
            vote_stage: if stage.is_empty() { None } else { Some(stage) },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issue(title: &str, span: Option<(u32, u32)>) -> LabeledIssue {
        LabeledIssue {
            source: LabelSource::Ra,
            title: title.into(),
            start: span.map(|(s, _)| TimeStamp(s)),
            end: span.map(|(_, e)| TimeStamp(e)),
            agendized: None,
            vote: None,
            vote_res: None,
            vote_stage: None,
        }
    }

    #[test]
    fn iou_basics() {
        assert_eq!(interval_iou((0.0, 10.0), (0.0, 10.0)), 1.0);
        assert_eq!(interval_iou((0.0, 10.0), (20.0, 30.0)), 0.0);
        // Hand evaluation: intersection 5, union 15.
        assert_eq!(interval_iou((0.0, 10.0), (5.0, 15.0)), 1.0 / 3.0);
        assert_eq!(interval_iou((5.0, 5.0), (5.0, 5.0)), 0.0); // zero-length union
    }

    #[test]
    fn iou_symmetric_and_bounded() {
        let cases = [((0.0, 7.0), (3.0, 12.0)), ((1.0, 2.0), (1.5, 9.0)), ((0.0, 1.0), (1.0, 2.0))];
        for (a, b) in cases {
            let ab = interval_iou(a, b);
            let ba = interval_iou(b, a);
            assert_eq!(ab, ba);
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn token_sort_handles_permutation() {
        assert_eq!(token_sort_ratio("john smith", "smith john"), 100.0);
        assert_eq!(token_sort_ratio("abc", "xyz"), 0.0);
        assert_eq!(token_sort_ratio("John Smith", "john smith"), 100.0);
    }

    #[test]
    fn token_sort_hand_value() {
        // Sorted: "lopez maria" vs "lopes maria", length 11 each.
        // Indel distance 2 (z deleted, s inserted), so similarity
        // 1 - 2/22 = 10/11.
        let expected = 100.0 * 10.0 / 11.0;
        assert!((token_sort_ratio("maria lopez", "maria lopes") - expected).abs() < 1e-12);
    }

    #[test]
    fn last_token_ratio_uses_final_token() {
        assert_eq!(last_token_ratio("maria lopez", "m lopez"), 100.0);
        // "lopez" vs "lopes": LCS 4 of 5+5 chars, so 2*4/10 = 0.8.
        assert!((last_token_ratio("ann lopez", "bee lopes") - 80.0).abs() < 1e-12);
    }

    #[test]
    fn gate_thresholds() {
        assert!(!passes_match_gate(0.2, 55.0)); // fails both
        assert!(passes_match_gate(0.35, 0.0));
        assert!(passes_match_gate(0.0, 60.0));
        assert!(passes_match_gate(0.3, 0.0)); // closed bounds
    }

    #[test]
    fn forced_single_pair() {
        let ra = vec![issue("budget hearing", Some((0, 100)))];
        let llm = vec![issue("budget hearing", Some((0, 100)))];
        let out = greedy_issue_match(&ra, &llm);
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.pairs[0].score, 1.0);
        assert!(out.ra_only.is_empty() && out.llm_only.is_empty());
    }

    #[test]
    fn failing_gate_leaves_both_unmatched() {
        let ra = vec![issue("alpha beta gamma", Some((0, 100)))];
        let llm = vec![issue("delta epsilon", Some((90, 500)))];
        // iou = 10/500 = 0.02, titles nearly disjoint.
        let out = greedy_issue_match(&ra, &llm);
        assert!(out.pairs.is_empty());
        assert_eq!(out.ra_only, vec![0]);
        assert_eq!(out.llm_only, vec![0]);
    }

    #[test]
    fn greedy_differs_from_optimal_on_hand_trace() {
        // Greedy takes (A,X) first, blocking the two-pair optimum
        // {(A,Y), (B,X)}; B's only remaining option fails the gate.
        let ra = vec![
            issue("river park cleanup day", Some((0, 100))),
            issue("river park cleanup", Some((10, 100))),
        ];
        let llm = vec![
            issue("river park cleanup day", Some((5, 100))),
            issue("unrelated sewer contract", Some((0, 30))),
        ];
        let out = greedy_issue_match(&ra, &llm);
        assert_eq!(out.pairs.len(), 1);
        assert_eq!((out.pairs[0].ra_index, out.pairs[0].llm_index), (0, 0));
        assert_eq!(out.ra_only, vec![1]);
        assert_eq!(out.llm_only, vec![1]);
    }

    #[test]
    fn pairs_are_one_to_one() {
        let ra = vec![
            issue("a b c", Some((0, 50))),
            issue("a b c d", Some((0, 60))),
            issue("zzz", None),
        ];
        let llm = vec![issue("a b c", Some((0, 55)))];
        let out = greedy_issue_match(&ra, &llm);
        assert!(out.pairs.len() <= ra.len().min(llm.len()));
        assert_eq!(out.pairs.len() + out.ra_only.len(), ra.len());
        assert_eq!(out.pairs.len() + out.llm_only.len(), llm.len());
    }

    #[test]
    fn missing_timestamps_match_only_by_title() {
        let ra = vec![issue("housing element update", None)];
        let llm = vec![issue("housing element update", Some((0, 10)))];
        let out = greedy_issue_match(&ra, &llm);
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.pairs[0].iou, 0.0);
    }

    #[test]
    fn confusion_matrix_totals_and_agreement() {
        let pairs = vec![("G", "G"), ("G", "NG"), ("NG", "NG"), ("NA", "G")];
        let m = confusion_matrix(pairs.into_iter()).unwrap();
        assert_eq!(m.total, 4);
        assert_eq!(m.count("G", "G"), 1);
        assert_eq!(m.truth_total("G"), 2);
        assert_eq!(m.predicted_total("G"), 2);
        assert_eq!(m.agreement_overall(), 0.5);
        assert!((m.agreement_over(&["G", "NG"]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn confusion_matrix_table_fixture() {
        // Six-cell fixture: G/NG truth-row agreement is 1130/1267 and
        // overall agreement over all 1300 rows is 1130/1300.
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        let cells = [
            ("G", "G", 676),
            ("G", "NG", 46),
            ("NG", "G", 91),
            ("NG", "NG", 454),
            ("NA", "G", 18),
            ("NA", "NG", 15),
        ];
        for (t, p, n) in cells {
            for _ in 0..n {
                pairs.push((t, p));
            }
        }
        let m = confusion_matrix(pairs.into_iter()).unwrap();
        assert_eq!(m.total, 1300);
        assert!((m.agreement_over(&["G", "NG"]) - 1130.0 / 1267.0).abs() < 1e-15);
        assert!((m.agreement_overall() - 1130.0 / 1300.0).abs() < 1e-15);
        // Marginals equal the input label totals exactly.
        assert_eq!(m.truth_total("G"), 722);
        assert_eq!(m.truth_total("NG"), 545);
        assert_eq!(m.truth_total("NA"), 33);
        assert_eq!(m.predicted_total("G"), 785);
        assert_eq!(m.predicted_total("NG"), 515);
    }

    #[test]
    fn empty_confusion_input_errors() {
        assert!(matches!(confusion_matrix(std::iter::empty()), Err(ValidationError::EmptyInput)));
    }

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_sets_perfect_scores() {
        let ra = names(&["ann smith", "bob jones"]);
        let counts = set_precision_recall(&ra, &ra, 70.0, NameMatchMode::Full);
        assert_eq!(counts.precision(), 1.0);
        assert_eq!(counts.recall(), 1.0);
    }

    #[test]
    fn extra_llm_name_costs_precision_only() {
        let ra = names(&["ann smith", "bob jones"]);
        let mut llm = ra.clone();
        llm.push("maria lopez".into());
        let counts = set_precision_recall(&ra, &llm, 70.0, NameMatchMode::Full);
        assert!((counts.precision() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(counts.recall(), 1.0);
    }

    #[test]
    fn disjoint_sets_zero_scores() {
        let ra = names(&["ann smith"]);
        let llm = names(&["xerxes quimby"]);
        let counts = set_precision_recall(&ra, &llm, 70.0, NameMatchMode::Full);
        assert_eq!(counts.precision(), 0.0);
        assert_eq!(counts.recall(), 0.0);
    }

    #[test]
    fn last_mode_matches_on_surname() {
        let ra = names(&["a smith"]);
        let llm = names(&["bee smith"]);
        let full = set_precision_recall(&ra, &llm, 70.0, NameMatchMode::Full);
        let last = set_precision_recall(&ra, &llm, 70.0, NameMatchMode::Last);
        assert_eq!(last.matched_llm, 1);
        assert!(last.matched_llm >= full.matched_llm);
    }

    #[test]
    fn name_agreement_summary() {
        let pairs = vec![
            ("ann smith".to_string(), "ann smith".to_string()),
            ("smith ann".to_string(), "ann smith".to_string()),
            ("bob jones".to_string(), "robert jones".to_string()),
        ];
        let agreement = name_agreement(&pairs, 70.0);
        assert_eq!(agreement.n_pairs, 3);
        assert_eq!(agreement.exact_matches, 1);
        assert!(agreement.fuzzy_matches >= 2);
        // Final tokens agree for pairs 1 and 3 ("smith ann" ends in "ann").
        assert_eq!(agreement.last_exact_matches, 2);
        assert_eq!(agreement.median_last_similarity, 100.0);
    }

    #[test]
    fn labeled_csv_parsers() {
        let speakers = "speaker_id,ra_name,llm_name,ra_gov,llm_gov\nSPEAKER_00,Ann Smith,Ann Smith,NG,NG\nSPEAKER_01,NA,Bob,G,G\n";
        let rows = read_labeled_speakers(speakers.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].ra_name, None);
        assert_eq!(rows[1].llm_name.as_deref(), Some("Bob"));

        let issues = "source,title,start,end,agendized,vote,vote_res,vote_stage\nra,Budget,00:00:10,00:10:00,true,true,5-0-0,final\nllm,Budget,00:00:12,00:09:50,true,true,5-0-0,final\nra,Comment,,,false,false,None,\n";
        let rows = read_labeled_issues(issues.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].vote_res, Some(VoteTally::new(5, 0, 0)));
        assert_eq!(rows[2].start, None);
        assert_eq!(rows[2].vote_res, None);
    }
}
