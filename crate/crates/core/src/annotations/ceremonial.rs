//! Ceremonial-item classification over concatenated issue text.

use std::sync::LazyLock;

use regex::RegexBuilder;

use super::IssueAnnotation;

// Inclusion and exclusion patterns for ceremonial business (proclamations,
// commendations, tributes), with pandemic/emergency proclamations carved out.
const CEREMONIAL_INCLUDE: &str = r"\bproclamations?\b|\bcommendations?\b|\bcertificates? of (recognition|appreciation)\b|\btributes?\b|\bhonoring\b|\bin honor of\b|\bin memoriam\b|\badjourn(ed|ment)? in memory\b|\b(awareness|heritage|history|appreciation|prevention) month\b|\bday of remembrance\b";
const CEREMONIAL_EXCLUDE: &str =
    r"\b(covid|coronavirus|emergency proclamation|local emergency|state of emergency|disaster|disasters)\b";

static INCLUDE_RE: LazyLock<regex::Regex> = LazyLock::new(|| {
    RegexBuilder::new(CEREMONIAL_INCLUDE).case_insensitive(true).build().unwrap()
});
static EXCLUDE_RE: LazyLock<regex::Regex> = LazyLock::new(|| {
    RegexBuilder::new(CEREMONIAL_EXCLUDE).case_insensitive(true).build().unwrap()
});

/// True iff the concatenated issue, summary, and vote-outcome text matches
/// the ceremonial pattern and not the emergency exclusion.
pub fn classify_ceremonial(issue: &IssueAnnotation) -> bool {
    let text = format!("{} {} {}", issue.issue, issue.summary, issue.vote_outcome);
    classify_ceremonial_text(&text)
}

/// Text-level variant; the issue-level call concatenates
/// `issue + " " + summary + " " + vote_outcome`.
pub fn classify_ceremonial_text(text: &str) -> bool {
    INCLUDE_RE.is_match(text) && !EXCLUDE_RE.is_match(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proclamations_and_commendations_match() {
        assert!(classify_ceremonial_text("Arbor Day Proclamation"));
        assert!(classify_ceremonial_text("commendation for retiring officer"));
        assert!(classify_ceremonial_text("Certificate of Recognition for volunteers"));
        assert!(classify_ceremonial_text("certificates of appreciation"));
        assert!(classify_ceremonial_text("Tribute to Coach Rivera"));
        assert!(classify_ceremonial_text("Honoring the 2021 graduating class"));
        assert!(classify_ceremonial_text("Reception in honor of Sister City delegation"));
        assert!(classify_ceremonial_text("Moment of silence in memoriam"));
        assert!(classify_ceremonial_text("Adjourned in memory of Jane Smith"));
        assert!(classify_ceremonial_text("adjournment in memory of a longtime resident"));
        assert!(classify_ceremonial_text("Breast Cancer Awareness Month"));
        assert!(classify_ceremonial_text("Black History Month presentation"));
        assert!(classify_ceremonial_text("National Day of Remembrance"));
    }

    #[test]
    fn emergency_exclusions_apply() {
        assert!(!classify_ceremonial_text("Emergency proclamation for COVID-19"));
        assert!(!classify_ceremonial_text("Proclamation of local emergency"));
        assert!(!classify_ceremonial_text("Proclamation extending the state of emergency"));
        assert!(!classify_ceremonial_text("Coronavirus awareness month proclamation"));
        assert!(!classify_ceremonial_text("Disaster preparedness proclamation"));
    }

    #[test]
    fn non_ceremonial_business_does_not_match() {
        assert!(!classify_ceremonial_text("Sidewalk Vending Ordinance"));
        assert!(!classify_ceremonial_text("Monthly budget report"));
        assert!(!classify_ceremonial_text("proclamationx")); // word boundary
    }

    #[test]
    fn depends_only_on_concatenated_text_fields() {
        use crate::annotations::{IssueAnnotation, VoteStage};
        let mk = |public: bool, agendized: bool| IssueAnnotation {
            issue: "Arbor Day Proclamation".into(),
            summary: "Annual tree planting".into(),
            public,
            vote: false,
            vote_res: None,
            vote_outcome: "None".into(),
            vote_stage: VoteStage::None,
            timestamp_start: None,
            timestamp_end: None,
            agendized,
            topic_id: None,
        };
        assert_eq!(classify_ceremonial(&mk(true, false)), classify_ceremonial(&mk(false, true)));
    }
}
