//! Vote-tally parsing, unanimity, and close-vote classification.

use serde::Serialize;

use super::{
    classify_ceremonial, collapse_consent_calendar, AnnotationError, IssueAnnotation, VoteTally,
};

/// Parses `"y-n-a"` (non-negative integers) or the literal `"None"`.
pub fn parse_vote_result(s: &str) -> Result<Option<VoteTally>, AnnotationError> {
    if s == "None" {
        return Ok(None);
    }
    let fields: Vec<&str> = s.split('-').collect();
    if fields.len() != 3 {
        return Err(AnnotationError::BadVoteString(s.to_string()));
    }
    let parse = |f: &str| -> Result<u32, AnnotationError> {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AnnotationError::BadVoteString(s.to_string()));
        }
        f.parse().map_err(|_| AnnotationError::BadVoteString(s.to_string()))
    };
    Ok(Some(VoteTally { yea: parse(fields[0])?, nay: parse(fields[1])?, abstain: parse(fields[2])? }))
}

/// Unanimous under the no-recorded-nays convention: `nay == 0 && yea > 0`.
/// Abstentions do not break unanimity.
pub fn is_unanimous(t: &VoteTally) -> bool {
    t.nay == 0 && t.yea > 0
}

/// The alternative convention, one flag away: abstentions break unanimity.
pub fn is_unanimous_strict(t: &VoteTally) -> bool {
    t.nay == 0 && t.abstain == 0 && t.yea > 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
    Tie,
}

fn outcome(yea: u32, nay: u32) -> Outcome {
    use std::cmp::Ordering::*;
    match yea.cmp(&nay) {
        Greater => Outcome::Pass,
        Less => Outcome::Fail,
        Equal => Outcome::Tie,
    }
}

/// True iff flipping a single vote (yea to nay, or nay to yea) would tie or
/// change pass/fail status, under the majority-of-votes-cast rule with
/// abstentions neutral. A tally that is already tied counts as close.
pub fn is_close_vote(t: &VoteTally) -> bool {
    let original = outcome(t.yea, t.nay);
    if original == Outcome::Tie {
        return true;
    }
    let flip_yea = t.yea > 0 && outcome(t.yea - 1, t.nay + 1) != original;
    let flip_nay = t.nay > 0 && outcome(t.yea + 1, t.nay - 1) != original;
    flip_yea || flip_nay
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnanimityCount {
    pub unanimous: usize,
    pub voted: usize,
    pub share: f64,
}

fn count_unanimity(issues: &[IssueAnnotation]) -> UnanimityCount {
    let tallies: Vec<&VoteTally> = issues.iter().filter_map(|i| i.vote_res.as_ref()).collect();
    let unanimous = tallies.iter().filter(|t| is_unanimous(t)).count();
    let voted = tallies.len();
    let share = if voted == 0 { f64::NAN } else { unanimous as f64 / voted as f64 };
    UnanimityCount { unanimous, voted, share }
}

/// The three audit variants of the unanimity share: raw, after collapsing
/// consent-calendar runs, and excluding ceremonial items.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnanimityAudit {
    pub raw: UnanimityCount,
    pub consent_collapsed: UnanimityCount,
    pub ceremonial_excluded: UnanimityCount,
}

pub fn unanimity_audit(issues: &[IssueAnnotation]) -> UnanimityAudit {
    let raw = count_unanimity(issues);
    let collapsed = collapse_consent_calendar(issues.to_vec());
    let consent_collapsed = count_unanimity(&collapsed);
    let non_ceremonial: Vec<IssueAnnotation> =
        issues.iter().filter(|i| !classify_ceremonial(i)).cloned().collect();
    let ceremonial_excluded = count_unanimity(&non_ceremonial);
    UnanimityAudit { raw, consent_collapsed, ceremonial_excluded }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tally_and_none() {
        assert_eq!(parse_vote_result("3-2-0").unwrap(), Some(VoteTally::new(3, 2, 0)));
        assert_eq!(parse_vote_result("None").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_tallies() {
        assert!(parse_vote_result("4-0").is_err());
        assert!(parse_vote_result("4-0-0-1").is_err());
        assert!(parse_vote_result("a-0-0").is_err());
        assert!(parse_vote_result("").is_err());
        assert!(parse_vote_result("none").is_err());
    }

    #[test]
    fn unanimity_convention() {
        assert!(is_unanimous(&VoteTally::new(5, 0, 0)));
        assert!(!is_unanimous(&VoteTally::new(3, 2, 0)));
        // Abstentions are neutral: 4-0-1 is unanimous (checked against the
        // hand-labeled fixture votes).
        assert!(is_unanimous(&VoteTally::new(4, 0, 1)));
        assert!(!is_unanimous(&VoteTally::new(0, 0, 5)));
        assert!(!is_unanimous_strict(&VoteTally::new(4, 0, 1)));
        assert!(is_unanimous_strict(&VoteTally::new(4, 0, 0)));
    }

    #[test]
    fn close_vote_enumerated_flips() {
        // 3-2-0: flipping one yea gives 2-3, outcome changes.
        assert!(is_close_vote(&VoteTally::new(3, 2, 0)));
        // 5-0-0: margin five, no single flip matters.
        assert!(!is_close_vote(&VoteTally::new(5, 0, 0)));
        // 3-3-0: already tied.
        assert!(is_close_vote(&VoteTally::new(3, 3, 0)));
        // 4-2-0: one flip produces the 3-3 tie.
        assert!(is_close_vote(&VoteTally::new(4, 2, 0)));
        // 5-1-0: one flip gives 4-2, still a pass.
        assert!(!is_close_vote(&VoteTally::new(5, 1, 0)));
        // 1-4-0: one flip gives 2-3, still a fail.
        assert!(!is_close_vote(&VoteTally::new(1, 4, 0)));
        // 2-4-0: one flip ties.
        assert!(is_close_vote(&VoteTally::new(2, 4, 0)));
        // Abstentions stay neutral.
        assert!(is_close_vote(&VoteTally::new(3, 2, 4)));
    }
}
