//! Machine-annotation ingestion and the vote-level classification logic.
//!
//! Input payloads are one JSON document per meeting per schema: a speaker
//! map object, an issue array, a topic taxonomy array, and a stance array of
//! `[comment_id, score]` pairs. Ingestion validates enums and cross-field
//! invariants; everything downstream works on the typed records.

mod ceremonial;
mod keywords;
mod remote;
mod shares;
mod votes;

pub use ceremonial::{classify_ceremonial, classify_ceremonial_text};
pub use keywords::{keyword_rate, KeywordTopic};
pub use remote::{remote_coverage, parse_remote_access_csv, RemoteAccessRecord, RemoteCoverage};
pub use shares::{agenda_topic_proportions, topic_shares, TopicShareWarning};
pub use votes::{is_close_vote, is_unanimous, is_unanimous_strict, parse_vote_result, unanimity_audit, UnanimityAudit};

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::TimeStamp;

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("speaker {speaker_id}: gov=G requires group=NA and gov=NG forbids it (got group={group})")]
    GovGroupMismatch { speaker_id: String, group: String },
    #[error("malformed vote tally `{0}`, expected `y-n-a` or `None`")]
    BadVoteString(String),
    #[error("vote tally on `{0}` is None")]
    MissingTally(String),
    #[error("issue `{issue}`: vote=false but vote_res/vote_stage indicate a vote")]
    VoteConsistency { issue: String },
    #[error("issue `{issue}`: timestamp_end precedes timestamp_start")]
    TimestampOrder { issue: String },
    #[error("issue `{issue}`: {source}")]
    BadTimestamp {
        issue: String,
        #[source]
        source: crate::transcript::TimestampError,
    },
    #[error("taxonomy must have exactly 10 entries, got {0}")]
    TaxonomySize(usize),
    #[error("taxonomy topic ids must be 0-9 each exactly once (problem near id {0})")]
    TaxonomyIds(i64),
    #[error("taxonomy entry {0} must have exactly 5 representative examples")]
    TaxonomyExamples(i64),
    #[error("stance score {score} for comment `{comment_id}` outside [-1, 1]")]
    StanceRange { comment_id: String, score: f64 },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GovStatus {
    G,
    NG,
}

/// Capacity in which a speaker appears; `NA` is reserved for government
/// speakers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeakerGroup {
    I,
    L,
    A,
    E,
    B,
    O,
    NA,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeakerAnnotation {
    pub speaker_id: String,
    /// `None` when the source emitted the literal missing marker "NA".
    pub name: Option<String>,
    pub gov: GovStatus,
    pub group: SpeakerGroup,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpeaker {
    name: String,
    gov: GovStatus,
    group: SpeakerGroup,
}

/// Parses the speaker-map JSON object (`{"SPEAKER_01": {...}, ...}`),
/// validating the gov/group coupling.
pub fn parse_speaker_map(json: &str) -> Result<Vec<SpeakerAnnotation>, AnnotationError> {
    let raw: BTreeMap<String, RawSpeaker> = serde_json::from_str(json)?;
    let mut out = Vec::with_capacity(raw.len());
    for (speaker_id, entry) in raw {
        let gov_is_g = entry.gov == GovStatus::G;
        let group_is_na = entry.group == SpeakerGroup::NA;
        if gov_is_g != group_is_na {
            return Err(AnnotationError::GovGroupMismatch {
                speaker_id,
                group: format!("{:?}", entry.group),
            });
        }
        let name = if entry.name == "NA" { None } else { Some(entry.name) };
        out.push(SpeakerAnnotation { speaker_id, name, gov: entry.gov, group: entry.group });
    }
    Ok(out)
}

/// A `yea-nay-abstain` tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub yea: u32,
    pub nay: u32,
    pub abstain: u32,
}

impl VoteTally {
    pub fn new(yea: u32, nay: u32, abstain: u32) -> Self {
        VoteTally { yea, nay, abstain }
    }

    pub fn render(&self) -> String {
        format!("{}-{}-{}", self.yea, self.nay, self.abstain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteStage {
    Final,
    Procedural,
    Unclear,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IssueAnnotation {
    pub issue: String,
    pub summary: String,
    pub public: bool,
    pub vote: bool,
    pub vote_res: Option<VoteTally>,
    pub vote_outcome: String,
    pub vote_stage: VoteStage,
    pub timestamp_start: Option<TimeStamp>,
    pub timestamp_end: Option<TimeStamp>,
    pub agendized: bool,
    /// Topic id 0-9 once classified; `None` while unassigned.
    pub topic_id: Option<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIssue {
    issue: String,
    summary: String,
    public: bool,
    vote: bool,
    vote_res: String,
    vote_outcome: String,
    vote_stage: VoteStage,
    timestamp_start: Option<String>,
    timestamp_end: Option<String>,
    // The issue prompt emits nine keys; agendized and topic_id are accepted
    // as optional extensions written by later pipeline stages.
    agendized: Option<bool>,
    topic_id: Option<u8>,
}

fn parse_issue_timestamp(
    issue: &str,
    value: Option<String>,
) -> Result<Option<TimeStamp>, AnnotationError> {
    match value {
        None => Ok(None),
        Some(s) => TimeStamp::parse(&s)
            .map(Some)
            .map_err(|source| AnnotationError::BadTimestamp { issue: issue.to_string(), source }),
    }
}

/// Parses the issue-array JSON for one meeting.
///
/// When the optional `agendized` key is absent it defaults to true for
/// issues that reached any vote stage and false otherwise.
pub fn parse_issue_list(json: &str) -> Result<Vec<IssueAnnotation>, AnnotationError> {
    let raw: Vec<RawIssue> = serde_json::from_str(json)?;
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        let vote_res = parse_vote_result(&r.vote_res)?;
        if !r.vote && (vote_res.is_some() || r.vote_stage != VoteStage::None) {
            return Err(AnnotationError::VoteConsistency { issue: r.issue });
        }
        let timestamp_start = parse_issue_timestamp(&r.issue, r.timestamp_start)?;
        let timestamp_end = parse_issue_timestamp(&r.issue, r.timestamp_end)?;
        if let (Some(s), Some(e)) = (timestamp_start, timestamp_end) {
            if e < s {
                return Err(AnnotationError::TimestampOrder { issue: r.issue });
            }
        }
        let agendized = r.agendized.unwrap_or(r.vote_stage != VoteStage::None);
        out.push(IssueAnnotation {
            issue: r.issue,
            summary: r.summary,
            public: r.public,
            vote: r.vote,
            vote_res,
            vote_outcome: r.vote_outcome,
            vote_stage: r.vote_stage,
            timestamp_start,
            timestamp_end,
            agendized,
            topic_id: r.topic_id,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicEntry {
    #[serde(rename = "topicID")]
    pub topic_id: u8,
    #[serde(rename = "topicTitle")]
    pub title: String,
    pub description: String,
    #[serde(rename = "representativeExamples")]
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicTaxonomy {
    pub entries: Vec<TopicEntry>,
}

impl TopicTaxonomy {
    pub fn title(&self, topic_id: u8) -> Option<&str> {
        self.entries.iter().find(|e| e.topic_id == topic_id).map(|e| e.title.as_str())
    }
}

/// Parses and validates the ten-topic taxonomy array.
pub fn parse_taxonomy(json: &str) -> Result<TopicTaxonomy, AnnotationError> {
    let entries: Vec<TopicEntry> = serde_json::from_str(json)?;
    if entries.len() != 10 {
        return Err(AnnotationError::TaxonomySize(entries.len()));
    }
    let mut seen = [false; 10];
    for e in &entries {
        if e.topic_id > 9 || seen[e.topic_id as usize] {
            return Err(AnnotationError::TaxonomyIds(i64::from(e.topic_id)));
        }
        seen[e.topic_id as usize] = true;
        if e.examples.len() != 5 {
            return Err(AnnotationError::TaxonomyExamples(i64::from(e.topic_id)));
        }
    }
    Ok(TopicTaxonomy { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StanceScore {
    pub comment_id: String,
    pub score: f64,
}

/// Parses the stance payload: a list of `[comment_id, score]` lists.
pub fn parse_stance_scores(json: &str) -> Result<Vec<StanceScore>, AnnotationError> {
    let raw: Vec<(String, f64)> = serde_json::from_str(json)?;
    let mut out = Vec::with_capacity(raw.len());
    for (comment_id, score) in raw {
        if !(-1.0..=1.0).contains(&score) {
            return Err(AnnotationError::StanceRange { comment_id, score });
        }
        out.push(StanceScore { comment_id, score });
    }
    Ok(out)
}

/// Writes the normalized issue table: one row per issue, columns matching
/// [`IssueAnnotation`] fields.
pub fn write_issue_csv<W: io::Write>(
    writer: W,
    meeting_id: &str,
    issues: &[IssueAnnotation],
) -> Result<(), AnnotationError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "meeting_id",
        "issue",
        "summary",
        "public",
        "vote",
        "vote_res",
        "vote_outcome",
        "vote_stage",
        "timestamp_start",
        "timestamp_end",
        "agendized",
        "topic_id",
    ])?;
    for issue in issues {
        w.write_record([
            meeting_id,
            &issue.issue,
            &issue.summary,
            &issue.public.to_string(),
            &issue.vote.to_string(),
            &issue.vote_res.map_or_else(|| "None".to_string(), |t| t.render()),
            &issue.vote_outcome,
            match issue.vote_stage {
                VoteStage::Final => "final",
                VoteStage::Procedural => "procedural",
                VoteStage::Unclear => "unclear",
                VoteStage::None => "none",
            },
            &issue.timestamp_start.map_or_else(String::new, |t| t.to_string()),
            &issue.timestamp_end.map_or_else(String::new, |t| t.to_string()),
            &issue.agendized.to_string(),
            &issue.topic_id.map_or_else(String::new, |t| t.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Collapses maximal runs of consecutive consent-calendar issues (outcome
/// containing "consent", identical tally) to their first row.
pub fn collapse_consent_calendar(issues: Vec<IssueAnnotation>) -> Vec<IssueAnnotation> {
    let mut out: Vec<IssueAnnotation> = Vec::with_capacity(issues.len());
    for issue in issues {
        let is_consent = issue.vote_outcome.to_lowercase().contains("consent");
        if is_consent {
            if let Some(prev) = out.last() {
                let prev_consent = prev.vote_outcome.to_lowercase().contains("consent");
                if prev_consent && prev.vote_res == issue.vote_res {
                    continue; // same run, keep the representative row
                }
            }
        }
        out.push(issue);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speaker_map_happy_path() {
        let json = r#"{"SPEAKER_01": {"name": "Olivia Martin", "gov": "G", "group": "NA"}}"#;
        let speakers = parse_speaker_map(json).unwrap();
        assert_eq!(speakers.len(), 1);
        assert_eq!(speakers[0].name.as_deref(), Some("Olivia Martin"));
        assert_eq!(speakers[0].gov, GovStatus::G);
        assert_eq!(speakers[0].group, SpeakerGroup::NA);
    }

    #[test]
    fn speaker_map_na_name_is_missing() {
        let json = r#"{"S": {"name": "NA", "gov": "NG", "group": "I"}}"#;
        let speakers = parse_speaker_map(json).unwrap();
        assert_eq!(speakers[0].name, None);
    }

    #[test]
    fn speaker_map_rejects_bad_enum_and_unknown_fields() {
        assert!(parse_speaker_map(r#"{"S": {"name": "x", "gov": "NG", "group": "Z"}}"#).is_err());
        assert!(parse_speaker_map(r#"{"S": {"name": "x", "gov": "NG", "group": "I", "extra": 1}}"#)
            .is_err());
    }

    #[test]
    fn speaker_map_enforces_gov_group_coupling() {
        let err = parse_speaker_map(r#"{"S": {"name": "x", "gov": "G", "group": "I"}}"#).unwrap_err();
        assert!(matches!(err, AnnotationError::GovGroupMismatch { .. }));
        assert!(parse_speaker_map(r#"{"S": {"name": "x", "gov": "NG", "group": "NA"}}"#).is_err());
    }

    fn issue_json(vote: bool, vote_res: &str, stage: &str) -> String {
        format!(
            r#"[{{"issue":"I","summary":"S","public":true,"vote":{vote},"vote_res":"{vote_res}","vote_outcome":"Approved","vote_stage":"{stage}","timestamp_start":"00:00:10","timestamp_end":"00:10:00"}}]"#
        )
    }

    #[test]
    fn issue_list_parses_and_defaults_agendized() {
        let issues = parse_issue_list(&issue_json(true, "3-2-0", "final")).unwrap();
        assert_eq!(issues[0].vote_res, Some(VoteTally::new(3, 2, 0)));
        assert!(issues[0].agendized, "vote_stage != none defaults agendized=true");

        let no_vote = r#"[{"issue":"I","summary":"S","public":true,"vote":false,"vote_res":"None","vote_outcome":"None","vote_stage":"none","timestamp_start":null,"timestamp_end":null}]"#;
        let issues = parse_issue_list(no_vote).unwrap();
        assert!(!issues[0].agendized);
        assert_eq!(issues[0].vote_res, None);
    }

    #[test]
    fn issue_list_rejects_vote_inconsistency_and_bad_order() {
        assert!(matches!(
            parse_issue_list(&issue_json(false, "3-2-0", "final")).unwrap_err(),
            AnnotationError::VoteConsistency { .. }
        ));
        let bad_order = r#"[{"issue":"I","summary":"S","public":true,"vote":false,"vote_res":"None","vote_outcome":"None","vote_stage":"none","timestamp_start":"00:10:00","timestamp_end":"00:00:10"}]"#;
        assert!(matches!(
            parse_issue_list(bad_order).unwrap_err(),
            AnnotationError::TimestampOrder { .. }
        ));
    }

    #[test]
    fn taxonomy_validation() {
        let entry = |id: u8| {
            format!(
                r#"{{"topicID":{id},"topicTitle":"T{id}","description":"d","representativeExamples":["a","b","c","d","e"]}}"#
            )
        };
        let ten: Vec<String> = (0..10).map(entry).collect();
        let json = format!("[{}]", ten.join(","));
        let tax = parse_taxonomy(&json).unwrap();
        assert_eq!(tax.entries.len(), 10);
        assert_eq!(tax.title(3), Some("T3"));

        let nine = format!("[{}]", ten[..9].join(","));
        assert!(matches!(parse_taxonomy(&nine).unwrap_err(), AnnotationError::TaxonomySize(9)));

        let dup = format!("[{},{}]", ten[..9].join(","), entry(0));
        assert!(matches!(parse_taxonomy(&dup).unwrap_err(), AnnotationError::TaxonomyIds(0)));
    }

    #[test]
    fn stance_scores_validated() {
        let scores = parse_stance_scores(r#"[["c1", 0.5], ["c2", -1.0]]"#).unwrap();
        assert_eq!(scores.len(), 2);
        assert!(matches!(
            parse_stance_scores(r#"[["c1", 1.5]]"#).unwrap_err(),
            AnnotationError::StanceRange { .. }
        ));
    }

    fn consent_issue(outcome: &str, tally: Option<VoteTally>) -> IssueAnnotation {
        IssueAnnotation {
            issue: "x".into(),
            summary: "y".into(),
            public: false,
            vote: tally.is_some(),
            vote_res: tally,
            vote_outcome: outcome.into(),
            vote_stage: if tally.is_some() { VoteStage::Final } else { VoteStage::None },
            timestamp_start: None,
            timestamp_end: None,
            agendized: true,
            topic_id: None,
        }
    }

    #[test]
    fn consent_run_collapses_to_one_row() {
        let tally = Some(VoteTally::new(5, 0, 0));
        let issues: Vec<_> =
            (0..4).map(|_| consent_issue("Approved on consent calendar", tally)).collect();
        let collapsed = collapse_consent_calendar(issues);
        assert_eq!(collapsed.len(), 1);
    }

    #[test]
    fn non_consent_passes_through() {
        let issues = vec![
            consent_issue("Approved", Some(VoteTally::new(5, 0, 0))),
            consent_issue("Denied", Some(VoteTally::new(2, 3, 0))),
        ];
        let collapsed = collapse_consent_calendar(issues.clone());
        assert_eq!(collapsed, issues);
    }

    #[test]
    fn two_runs_split_by_non_consent() {
        // Hand-built fixture: two consent runs separated by a non-consent item.
        let t = Some(VoteTally::new(5, 0, 0));
        let issues = vec![
            consent_issue("Approved on consent calendar", t),
            consent_issue("Approved on consent calendar", t),
            consent_issue("Approved", Some(VoteTally::new(3, 2, 0))),
            consent_issue("Consent calendar adopted", t),
            consent_issue("Consent calendar adopted", t),
        ];
        let collapsed = collapse_consent_calendar(issues);
        assert_eq!(collapsed.len(), 3);
    }

    #[test]
    fn adjacent_consent_runs_with_different_tallies_stay_separate() {
        let issues = vec![
            consent_issue("Approved on consent calendar", Some(VoteTally::new(5, 0, 0))),
            consent_issue("Approved on consent calendar", Some(VoteTally::new(5, 0, 0))),
            consent_issue("Approved on consent calendar", Some(VoteTally::new(4, 1, 0))),
        ];
        let collapsed = collapse_consent_calendar(issues);
        assert_eq!(collapsed.len(), 2);
    }

    #[test]
    fn collapse_is_idempotent() {
        let t = Some(VoteTally::new(5, 0, 0));
        let issues = vec![
            consent_issue("Approved on consent calendar", t),
            consent_issue("Approved on consent calendar", t),
            consent_issue("Approved", Some(VoteTally::new(3, 2, 0))),
            consent_issue("Consent calendar adopted", t),
        ];
        let once = collapse_consent_calendar(issues);
        let twice = collapse_consent_calendar(once.clone());
        assert_eq!(once, twice);
    }
}
