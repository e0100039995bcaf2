//! Fuzzy record linkage from extracted speaker names to voter-file rows.
//!
//! The pipeline per name: hallucination filtering against the transcript,
//! priority-class assignment against each voter in the meeting's (city, year)
//! slice, best-class resolution with a weighted Jaro-Winkler tie-break, and an
//! adjacent-year fallback for movers.

mod address;
mod balance;
mod metaphone;
mod nicknames;
mod similarity;

pub use address::{match_address, normalize_address, AddressError, Ownership, PropertyTable};
pub use balance::{standardized_difference, BalanceError};
pub use metaphone::{metaphone, metaphone_match};
pub use nicknames::{NicknameError, NicknameTable};
pub use similarity::{fold_name, jaro, jaro_winkler, weighted_jw};

use std::collections::{HashMap, HashSet};
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinkageError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("voter file schema mismatch: expected header starting `voter_id,first,middle,last,city,year`, got `{0}`")]
    VoterSchema(String),
}

/// An extracted speaker name headed into linkage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameCandidate {
    pub first: String,
    pub last: String,
    /// True when `last` is a single-letter initial rather than a surname.
    pub last_is_initial: bool,
    pub city: String,
    pub year: i32,
    pub source_speaker_id: String,
}

impl NameCandidate {
    /// Splits an extracted display name ("Olivia Martin", "Olivia M.",
    /// "Maria") into a candidate. Multi-token middles fold into the first
    /// name; a trailing single-letter token (with optional period) is an
    /// initial.
    pub fn from_display_name(
        name: &str,
        city: &str,
        year: i32,
        source_speaker_id: &str,
    ) -> Option<Self> {
        let tokens: Vec<&str> = name.split_whitespace().collect();
        if tokens.is_empty() {
            return None;
        }
        let (first, last, last_is_initial) = if tokens.len() == 1 {
            (tokens[0].to_string(), String::new(), false)
        } else {
            let last_raw = tokens[tokens.len() - 1];
            let stripped = last_raw.trim_end_matches('.');
            let first = tokens[..tokens.len() - 1].join(" ");
            if stripped.chars().count() == 1 {
                (first, stripped.to_string(), true)
            } else {
                (first, last_raw.to_string(), false)
            }
        };
        Some(NameCandidate {
            first,
            last,
            last_is_initial,
            city: city.to_string(),
            year,
            source_speaker_id: source_speaker_id.to_string(),
        })
    }
}

/// One voter-file row. CSV header:
/// `voter_id,first,middle,last,city,year,age,gender,party,ethnicity,address`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterRecord {
    pub voter_id: String,
    pub first: String,
    pub middle: String,
    pub last: String,
    pub city: String,
    pub year: i32,
    pub age: Option<f64>,
    pub gender: String,
    pub party: String,
    pub ethnicity: String,
    pub address: String,
}

pub const VOTER_CSV_HEADER: &str =
    "voter_id,first,middle,last,city,year,age,gender,party,ethnicity,address";

pub fn read_voter_csv<R: io::Read>(reader: R) -> Result<Vec<VoterRecord>, LinkageError> {
    let mut rdr = csv::Reader::from_reader(reader);
    {
        let got = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
        if got != VOTER_CSV_HEADER {
            return Err(LinkageError::VoterSchema(got));
        }
    }
    let mut out = Vec::new();
    for record in rdr.deserialize() {
        out.push(record?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityLattice {
    FullName,
    FirstPlusInitial,
}

impl PriorityLattice {
    pub fn name(self) -> &'static str {
        match self {
            PriorityLattice::FullName => "full_name",
            PriorityLattice::FirstPlusInitial => "first_plus_initial",
        }
    }
}

/// A match class: lattice plus 1-based rank (1 = best).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPriority {
    pub lattice: PriorityLattice,
    pub rank: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub candidate: NameCandidate,
    pub voter: Option<VoterRecord>,
    pub priority: Option<MatchPriority>,
    /// Present only when the weighted Jaro-Winkler tie-break was invoked.
    pub tie_break_score: Option<f64>,
    /// -1/0/+1: which year's slice produced the match.
    pub fallback_year: i8,
}

impl MatchResult {
    fn unmatched(candidate: NameCandidate) -> Self {
        MatchResult { candidate, voter: None, priority: None, tie_break_score: None, fallback_year: 0 }
    }

    pub fn is_matched(&self) -> bool {
        self.voter.is_some()
    }
}

/// Outcome of the transcript hallucination filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    Accepted(NameCandidate),
    Rejected { candidate: NameCandidate, reason: &'static str },
}

fn transcript_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|tok| fold_name(tok.trim_matches(|c: char| !c.is_alphanumeric())))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Filters hallucinated names: a full name needs both tokens somewhere in the
/// transcript (first-only presence truncates the last name to an initial); a
/// first-plus-initial name needs the pair to appear consecutively.
pub fn verify_in_transcript(candidate: NameCandidate, transcript: &str) -> Verification {
    let tokens = transcript_tokens(transcript);
    let token_set: HashSet<&str> = tokens.iter().map(String::as_str).collect();
    let first = fold_name(&candidate.first);
    let last = fold_name(&candidate.last);

    if candidate.last_is_initial {
        let Some(initial) = last.chars().next() else {
            return Verification::Rejected { candidate, reason: "empty initial" };
        };
        let found = tokens.windows(2).any(|w| {
            w[0] == first && w[1].chars().count() == 1 && w[1].starts_with(initial)
        });
        return if found {
            Verification::Accepted(candidate)
        } else {
            Verification::Rejected { candidate, reason: "first name + initial not consecutive in transcript" }
        };
    }

    if !first.is_empty() && !last.is_empty() {
        // First names may hold multiple tokens ("Mary Jo"); all must appear.
        let first_in = first.split_whitespace().all(|t| token_set.contains(t));
        let last_in = token_set.contains(last.as_str());
        return match (first_in, last_in) {
            (true, true) => Verification::Accepted(candidate),
            (true, false) => {
                let initial = last.chars().next().unwrap().to_string();
                Verification::Accepted(NameCandidate {
                    last: initial,
                    last_is_initial: true,
                    ..candidate
                })
            }
            _ => Verification::Rejected { candidate, reason: "name not found in transcript" },
        };
    }

    // Single-token names: keep them when present (they cannot link anyway).
    let only = if first.is_empty() { &last } else { &first };
    if only.split_whitespace().all(|t| token_set.contains(t)) {
        Verification::Accepted(candidate)
    } else {
        Verification::Rejected { candidate, reason: "name not found in transcript" }
    }
}

/// Pairwise name-agreement facts between a candidate and one voter row, the
/// inputs to both priority lattices.
struct NameFacts {
    first_exact: bool,
    first_nick: bool,
    first_meta: bool,
    mid_exact: bool,
    mid_nick: bool,
    mid_meta: bool,
    last_exact: bool,
    last_meta: bool,
    last_initial_exact: bool,
}

impl NameFacts {
    fn compute(candidate: &NameCandidate, voter: &VoterRecord, nicknames: &NicknameTable) -> Self {
        let cf = fold_name(&candidate.first);
        let cl = fold_name(&candidate.last);
        let vf = fold_name(&voter.first);
        let vm = fold_name(&voter.middle);
        let vl = fold_name(&voter.last);

        NameFacts {
            first_exact: !cf.is_empty() && cf == vf,
            first_nick: nicknames.matches(&cf, &vf),
            first_meta: metaphone_match(&cf, &vf),
            mid_exact: !cf.is_empty() && !vm.is_empty() && cf == vm,
            mid_nick: nicknames.matches(&cf, &vm),
            mid_meta: metaphone_match(&cf, &vm),
            last_exact: !cl.is_empty() && cl == vl,
            last_meta: metaphone_match(&cl, &vl),
            last_initial_exact: match (cl.chars().next(), vl.chars().next()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }
}

/// Assigns the best (lowest-rank) priority class that holds for this
/// (candidate, voter) pair, or `None` when no class holds.
pub fn assign_priority(
    candidate: &NameCandidate,
    voter: &VoterRecord,
    nicknames: &NicknameTable,
) -> Option<MatchPriority> {
    let has_first = !candidate.first.trim().is_empty();
    let has_last = !candidate.last.trim().is_empty();

    if candidate.last_is_initial && has_first {
        let f = NameFacts::compute(candidate, voter, nicknames);
        // Every first-plus-initial class requires the last initial to match
        // exactly.
        if !f.last_initial_exact {
            return None;
        }
        let rank = if f.first_exact {
            1
        } else if f.first_nick {
            2
        } else if f.mid_exact {
            3
        } else if f.mid_nick {
            4
        } else if f.first_meta {
            5
        } else if f.mid_meta {
            6
        } else {
            return None;
        };
        return Some(MatchPriority { lattice: PriorityLattice::FirstPlusInitial, rank });
    }

    if !(has_first && has_last) {
        // Single-token names never link.
        return None;
    }

    let f = NameFacts::compute(candidate, voter, nicknames);
    let rank = if f.first_exact && f.last_exact {
        1
    } else if f.last_exact && (f.first_nick || f.first_meta) {
        2
    } else if f.first_exact && f.last_meta {
        3
    } else if f.first_nick && f.last_meta {
        4
    } else if f.mid_exact && f.last_exact {
        5
    } else if f.mid_nick && f.last_exact {
        6
    } else if f.mid_exact && f.last_meta {
        7
    } else if f.mid_nick && f.last_meta {
        8
    } else if f.first_meta && f.last_meta {
        9
    } else if f.mid_meta && f.last_exact {
        10
    } else if f.mid_meta && f.last_meta {
        11
    } else if f.last_exact || f.last_meta {
        12
    } else {
        return None;
    };
    Some(MatchPriority { lattice: PriorityLattice::FullName, rank })
}

/// In the full-name lattice, ranks 1-11 involve some exact/nickname/metaphone
/// agreement on the given name (first or middle); rank 12 is last-name-only.
fn has_given_name_match(priority: MatchPriority) -> bool {
    match priority.lattice {
        PriorityLattice::FullName => priority.rank <= 11,
        PriorityLattice::FirstPlusInitial => true,
    }
}

/// Resolves one candidate against the voter slice for its (city, year).
///
/// Among voters in the best nonempty class: a unique hit matches; multiple
/// hits match only when the candidate carries a complete last name and a
/// given-name match, in which case finalists are filtered to exact agreement
/// on the last name's first letter and the greatest weighted Jaro-Winkler
/// similarity wins. Exact score ties stay unmatched.
pub fn resolve_match<'v>(
    candidate: &NameCandidate,
    voters: impl IntoIterator<Item = &'v VoterRecord>,
    nicknames: &NicknameTable,
) -> MatchResult {
    let mut best: Option<(MatchPriority, Vec<&'v VoterRecord>)> = None;
    for voter in voters {
        let Some(priority) = assign_priority(candidate, voter, nicknames) else {
            continue;
        };
        match &mut best {
            None => best = Some((priority, vec![voter])),
            Some((current, hits)) => {
                if priority.rank < current.rank {
                    *current = priority;
                    hits.clear();
                    hits.push(voter);
                } else if priority.rank == current.rank {
                    hits.push(voter);
                }
            }
        }
    }

    let Some((priority, hits)) = best else {
        return MatchResult::unmatched(candidate.clone());
    };

    if hits.len() == 1 {
        return MatchResult {
            candidate: candidate.clone(),
            voter: Some(hits[0].clone()),
            priority: Some(priority),
            tie_break_score: None,
            fallback_year: 0,
        };
    }

    // Multiple best-class hits: refuse unless a complete last name and a
    // given-name match license the similarity tie-break.
    if candidate.last_is_initial || !has_given_name_match(priority) {
        return MatchResult::unmatched(candidate.clone());
    }

    let cf = fold_name(&candidate.first);
    let cl = fold_name(&candidate.last);
    let cl_initial = cl.chars().next();
    let finalists: Vec<&VoterRecord> = hits
        .into_iter()
        .filter(|v| fold_name(&v.last).chars().next() == cl_initial)
        .collect();
    if finalists.is_empty() {
        return MatchResult::unmatched(candidate.clone());
    }

    let mut best_score = f64::NEG_INFINITY;
    let mut best_voter: Option<&VoterRecord> = None;
    let mut tied = false;
    for voter in finalists {
        let score = weighted_jw(&cf, &cl, &fold_name(&voter.first), &fold_name(&voter.last));
        if score > best_score {
            best_score = score;
            best_voter = Some(voter);
            tied = false;
        } else if score == best_score {
            tied = true;
        }
    }
    if tied {
        return MatchResult::unmatched(candidate.clone());
    }
    MatchResult {
        candidate: candidate.clone(),
        voter: best_voter.cloned(),
        priority: Some(priority),
        tie_break_score: Some(best_score),
        fallback_year: 0,
    }
}

/// Fallback for candidates unmatched in their own year: retry against the
/// preceding and subsequent years. A unique hit in one year is accepted; hits
/// in both years keep the better priority rank (the preceding year on equal
/// rank for the same voter), and conflicting voters at equal rank stay
/// unmatched.
pub fn adjacent_year_fallback<'v>(
    candidate: &NameCandidate,
    prev_year: impl IntoIterator<Item = &'v VoterRecord>,
    next_year: impl IntoIterator<Item = &'v VoterRecord>,
    nicknames: &NicknameTable,
) -> MatchResult {
    let mut prev = resolve_match(candidate, prev_year, nicknames);
    let mut next = resolve_match(candidate, next_year, nicknames);
    prev.fallback_year = -1;
    next.fallback_year = 1;

    match (prev.is_matched(), next.is_matched()) {
        (false, false) => MatchResult::unmatched(candidate.clone()),
        (true, false) => prev,
        (false, true) => next,
        (true, true) => {
            let rank_prev = prev.priority.unwrap().rank;
            let rank_next = next.priority.unwrap().rank;
            let same_voter =
                prev.voter.as_ref().unwrap().voter_id == next.voter.as_ref().unwrap().voter_id;
            if rank_prev <= rank_next {
                if rank_prev < rank_next || same_voter {
                    prev
                } else {
                    MatchResult::unmatched(candidate.clone())
                }
            } else {
                next
            }
        }
    }
}

/// Read-only voter index keyed by folded city name and year.
#[derive(Debug, Default)]
pub struct VoterIndex {
    voters: Vec<VoterRecord>,
    slices: HashMap<(String, i32), Vec<usize>>,
}

impl VoterIndex {
    pub fn build(voters: Vec<VoterRecord>) -> Self {
        let mut slices: HashMap<(String, i32), Vec<usize>> = HashMap::new();
        for (i, v) in voters.iter().enumerate() {
            slices.entry((fold_name(&v.city), v.year)).or_default().push(i);
        }
        VoterIndex { voters, slices }
    }

    pub fn len(&self) -> usize {
        self.voters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voters.is_empty()
    }

    pub fn slice(&self, city: &str, year: i32) -> impl Iterator<Item = &VoterRecord> {
        self.slices
            .get(&(fold_name(city), year))
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.voters[i])
    }

    /// Full resolution for one candidate: primary year, then the
    /// adjacent-year fallback.
    pub fn link(&self, candidate: &NameCandidate, nicknames: &NicknameTable) -> MatchResult {
        let primary = resolve_match(candidate, self.slice(&candidate.city, candidate.year), nicknames);
        if primary.is_matched() {
            return primary;
        }
        adjacent_year_fallback(
            candidate,
            self.slice(&candidate.city, candidate.year - 1),
            self.slice(&candidate.city, candidate.year + 1),
            nicknames,
        )
    }
}

/// Writes the match table:
/// `speaker_key,voter_id,priority_lattice,priority_rank,fallback_year,tie_break_score`.
pub fn write_match_csv<'a, W: io::Write>(
    writer: W,
    rows: impl IntoIterator<Item = (&'a str, &'a MatchResult)>,
) -> Result<(), LinkageError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "speaker_key",
        "voter_id",
        "priority_lattice",
        "priority_rank",
        "fallback_year",
        "tie_break_score",
    ])?;
    for (key, result) in rows {
        let voter_id = result.voter.as_ref().map_or("", |v| v.voter_id.as_str());
        let lattice = result.priority.map_or("", |p| p.lattice.name());
        let rank = result.priority.map_or_else(String::new, |p| p.rank.to_string());
        let fallback = result.fallback_year.to_string();
        let score = result.tie_break_score.map_or_else(String::new, |s| format!("{s:.6}"));
        w.write_record([key, voter_id, lattice, &rank, &fallback, &score])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn candidate(first: &str, last: &str, initial: bool) -> NameCandidate {
        NameCandidate {
            first: first.into(),
            last: last.into(),
            last_is_initial: initial,
            city: "testville".into(),
            year: 2021,
            source_speaker_id: "SPEAKER_01".into(),
        }
    }

    fn voter(id: &str, first: &str, middle: &str, last: &str) -> VoterRecord {
        VoterRecord {
            voter_id: id.into(),
            first: first.into(),
            middle: middle.into(),
            last: last.into(),
            city: "testville".into(),
            year: 2021,
            age: Some(50.0),
            gender: "F".into(),
            party: "D".into(),
            ethnicity: "W".into(),
            address: "1 MAIN ST".into(),
        }
    }

    #[test]
    fn display_name_splitting() {
        let c = NameCandidate::from_display_name("Olivia Martin", "x", 2021, "S").unwrap();
        assert_eq!((c.first.as_str(), c.last.as_str(), c.last_is_initial), ("Olivia", "Martin", false));
        let c = NameCandidate::from_display_name("Olivia M.", "x", 2021, "S").unwrap();
        assert_eq!((c.first.as_str(), c.last.as_str(), c.last_is_initial), ("Olivia", "M", true));
        let c = NameCandidate::from_display_name("Maria", "x", 2021, "S").unwrap();
        assert_eq!((c.first.as_str(), c.last.as_str()), ("Maria", ""));
        let c = NameCandidate::from_display_name("Mary Jo Kopechne", "x", 2021, "S").unwrap();
        assert_eq!((c.first.as_str(), c.last.as_str()), ("Mary Jo", "Kopechne"));
        assert!(NameCandidate::from_display_name("  ", "x", 2021, "S").is_none());
    }

    #[test]
    fn verify_full_name_non_adjacent() {
        let c = candidate("Maria", "Lopez", false);
        let v = verify_in_transcript(c.clone(), "good evening maria here about lopez family matters");
        assert_eq!(v, Verification::Accepted(c));
    }

    #[test]
    fn verify_truncates_missing_last_to_initial() {
        let c = candidate("Maria", "Lopez", false);
        match verify_in_transcript(c, "my name is maria and i live on elm street") {
            Verification::Accepted(modified) => {
                assert_eq!(modified.last, "l");
                assert!(modified.last_is_initial);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn verify_rejects_absent_name() {
        let c = candidate("Maria", "Lopez", false);
        assert!(matches!(
            verify_in_transcript(c, "nobody spoke tonight"),
            Verification::Rejected { .. }
        ));
    }

    #[test]
    fn verify_initial_requires_consecutive() {
        let c = candidate("Olivia", "M", true);
        assert!(matches!(
            verify_in_transcript(c.clone(), "next is olivia m. from downtown"),
            Verification::Accepted(_)
        ));
        assert!(matches!(
            verify_in_transcript(c, "olivia spoke and later m street came up... not adjacent"),
            Verification::Rejected { .. }
        ));
    }

    #[test]
    fn full_lattice_rank_spot_checks() {
        let nicks = NicknameTable::builtin();
        let c = candidate("Robert", "Smith", false);
        let rank = |v: &VoterRecord| assign_priority(&c, v, &nicks).map(|p| p.rank);

        assert_eq!(rank(&voter("1", "Robert", "", "Smith")), Some(1));
        assert_eq!(rank(&voter("2", "Bob", "", "Smith")), Some(2)); // nickname first
        assert_eq!(rank(&voter("4", "Robert", "", "Smyth")), Some(3));
        assert_eq!(rank(&voter("5", "Bob", "", "Smyth")), Some(4));
        assert_eq!(rank(&voter("6", "Jane", "Robert", "Smith")), Some(5));
        assert_eq!(rank(&voter("7", "Jane", "Bob", "Smith")), Some(6));
        assert_eq!(rank(&voter("8", "Jane", "Robert", "Smyth")), Some(7));
        assert_eq!(rank(&voter("9", "Jane", "Bob", "Smyth")), Some(8));
        assert_eq!(rank(&voter("12", "Jane", "", "Smith")), Some(12)); // last only
        assert_eq!(rank(&voter("13", "Jane", "", "Jones")), None);
    }

    #[test]
    fn full_lattice_metaphone_ranks() {
        let nicks = NicknameTable::empty();
        let c = candidate("Jon", "Smith", false);
        let rank = |v: &VoterRecord| assign_priority(&c, v, &nicks).map(|p| p.rank);
        // Metaphone(jon) == metaphone(john) == JN.
        assert_eq!(rank(&voter("1", "John", "", "Smith")), Some(2));
        assert_eq!(rank(&voter("2", "John", "", "Smyth")), Some(9));
        assert_eq!(rank(&voter("3", "Mary", "John", "Smith")), Some(10));
        assert_eq!(rank(&voter("4", "Mary", "John", "Smyth")), Some(11));
    }

    #[test]
    fn initial_lattice_ranks() {
        let nicks = NicknameTable::builtin();
        let c = candidate("Olivia", "M", true);
        let rank = |v: &VoterRecord| assign_priority(&c, v, &nicks).map(|p| p.rank);

        assert_eq!(rank(&voter("1", "Olivia", "", "Martin")), Some(1));
        assert_eq!(rank(&voter("2", "Olivia", "", "Brown")), None); // initial mismatch
        let c2 = candidate("Bill", "M", true);
        let r2 = |v: &VoterRecord| assign_priority(&c2, v, &nicks).map(|p| p.rank);
        assert_eq!(r2(&voter("3", "William", "", "Martin")), Some(2));
        assert_eq!(r2(&voter("4", "Jane", "Bill", "Martin")), Some(3));
        assert_eq!(r2(&voter("5", "Jane", "William", "Martin")), Some(4));
        let c3 = candidate("Jon", "S", true);
        let r3 = |v: &VoterRecord| assign_priority(&c3, v, &nicks).map(|p| p.rank);
        assert_eq!(r3(&voter("6", "John", "", "Smith")), Some(5));
        assert_eq!(r3(&voter("7", "Mary", "John", "Smith")), Some(6));
    }

    #[test]
    fn unique_best_class_matches() {
        let nicks = NicknameTable::builtin();
        let c = candidate("Ann", "Smith", false);
        let voters = vec![voter("1", "Ann", "", "Smith"), voter("2", "Anne", "", "Smith")];
        let result = resolve_match(&c, &voters, &nicks);
        assert_eq!(result.voter.as_ref().unwrap().voter_id, "1");
        assert_eq!(result.priority.unwrap().rank, 1);
        assert_eq!(result.tie_break_score, None);
    }

    #[test]
    fn tie_break_picks_greatest_weighted_jw() {
        let nicks = NicknameTable::empty();
        let c = candidate("Jon", "Smith", false);
        // Both rank 2 (exact last + metaphone first); John beats Jan on JW.
        let voters = vec![voter("1", "John", "", "Smith"), voter("2", "Jan", "", "Smith")];
        let result = resolve_match(&c, &voters, &nicks);
        assert_eq!(result.voter.as_ref().unwrap().voter_id, "1");
        let score = result.tie_break_score.unwrap();
        assert!((score - weighted_jw("jon", "smith", "john", "smith")).abs() < 1e-15);
    }

    #[test]
    fn last_name_only_ambiguity_stays_unmatched() {
        let nicks = NicknameTable::empty();
        let c = candidate("Zelda", "Smith", false);
        let voters = vec![voter("1", "Aaron", "", "Smith"), voter("2", "Beth", "", "Smith")];
        let result = resolve_match(&c, &voters, &nicks);
        assert!(!result.is_matched(), "two rank-12 hits must not match");
    }

    #[test]
    fn initial_candidates_never_tie_break() {
        let nicks = NicknameTable::empty();
        let c = candidate("Olivia", "M", true);
        let voters = vec![voter("1", "Olivia", "", "Martin"), voter("2", "Olivia", "", "Moore")];
        assert!(!resolve_match(&c, &voters, &nicks).is_matched());
    }

    #[test]
    fn exact_score_tie_stays_unmatched() {
        let nicks = NicknameTable::empty();
        let c = candidate("Jon", "Smith", false);
        let voters = vec![voter("1", "John", "", "Smith"), voter("2", "John", "", "Smith")];
        assert!(!resolve_match(&c, &voters, &nicks).is_matched());
    }

    #[test]
    fn empty_slice_is_unmatched() {
        let nicks = NicknameTable::empty();
        let c = candidate("Ann", "Smith", false);
        assert!(!resolve_match(&c, &[], &nicks).is_matched());
    }

    #[test]
    fn fallback_unique_year_accepted() {
        let nicks = NicknameTable::empty();
        let c = candidate("Ann", "Smith", false);
        let next = vec![voter("9", "Ann", "", "Smith")];
        let result = adjacent_year_fallback(&c, &[], &next, &nicks);
        assert!(result.is_matched());
        assert_eq!(result.fallback_year, 1);
    }

    #[test]
    fn fallback_conflict_better_rank_wins() {
        let nicks = NicknameTable::empty();
        let c = candidate("Ann", "Smith", false);
        let prev = vec![voter("p", "Anne", "", "Smith")]; // rank 2 via metaphone
        let next = vec![voter("n", "Ann", "", "Smith")]; // rank 1
        let result = adjacent_year_fallback(&c, &prev, &next, &nicks);
        assert_eq!(result.voter.as_ref().unwrap().voter_id, "n");
        assert_eq!(result.fallback_year, 1);
    }

    #[test]
    fn fallback_conflict_equal_rank_unmatched() {
        let nicks = NicknameTable::empty();
        let c = candidate("Ann", "Smith", false);
        let prev = vec![voter("p", "Ann", "", "Smith")];
        let next = vec![voter("n", "Ann", "", "Smith")];
        assert!(!adjacent_year_fallback(&c, &prev, &next, &nicks).is_matched());
    }

    #[test]
    fn fallback_same_voter_both_years_accepted() {
        let nicks = NicknameTable::empty();
        let c = candidate("Ann", "Smith", false);
        let prev = vec![voter("same", "Ann", "", "Smith")];
        let next = vec![voter("same", "Ann", "", "Smith")];
        let result = adjacent_year_fallback(&c, &prev, &next, &nicks);
        assert!(result.is_matched());
        assert_eq!(result.fallback_year, -1);
    }

    #[test]
    fn voter_index_slices_by_city_year() {
        let mut a = voter("1", "Ann", "", "Smith");
        a.year = 2020;
        let b = voter("2", "Ann", "", "Smith");
        let mut c = voter("3", "Ann", "", "Smith");
        c.city = "Elsewhere".into();
        let index = VoterIndex::build(vec![a, b, c]);
        assert_eq!(index.slice("testville", 2021).count(), 1);
        assert_eq!(index.slice("TESTVILLE", 2020).count(), 1);
        assert_eq!(index.slice("elsewhere", 2021).count(), 1);
        assert_eq!(index.slice("nowhere", 2021).count(), 0);

        let cand = candidate("Ann", "Smith", false);
        let result = index.link(&cand, &NicknameTable::empty());
        assert_eq!(result.voter.unwrap().voter_id, "2");
        assert_eq!(result.fallback_year, 0);
    }

    #[test]
    fn voter_csv_round_trip_and_schema_check() {
        let csv = "voter_id,first,middle,last,city,year,age,gender,party,ethnicity,address\n\
                   v1,Ann,,Smith,Testville,2021,44,F,D,W,1 MAIN ST\n\
                   v2,Bo,J,Lee,Testville,2021,,M,R,A,\n";
        let voters = read_voter_csv(csv.as_bytes()).unwrap();
        assert_eq!(voters.len(), 2);
        assert_eq!(voters[0].age, Some(44.0));
        assert_eq!(voters[1].age, None);

        let bad = "id,first\n1,A\n";
        assert!(matches!(read_voter_csv(bad.as_bytes()), Err(LinkageError::VoterSchema(_))));
    }
}
