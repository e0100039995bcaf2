//! Test-side oracle for the linkage lattice: every match class evaluated as
//! a standalone predicate, minimum rank taken, and the resolution rules
//! re-stated independently of the library's implementation path.

use gavel_core::linkage::{
    fold_name, metaphone, weighted_jw, MatchPriority, NameCandidate, NicknameTable,
    PriorityLattice, VoterRecord,
};

fn meta_eq(a: &str, b: &str) -> bool {
    let ca = metaphone(a);
    !ca.is_empty() && ca == metaphone(b)
}

fn exact(a: &str, b: &str) -> bool {
    let fa = fold_name(a);
    !fa.is_empty() && fa == fold_name(b)
}

fn nick(table: &NicknameTable, a: &str, b: &str) -> bool {
    table.matches(a, b)
}

/// The twelve full-name classes, each as its own predicate in bullet order.
fn full_name_predicates(
    c: &NameCandidate,
    v: &VoterRecord,
    t: &NicknameTable,
) -> [bool; 12] {
    [
        exact(&c.first, &v.first) && exact(&c.last, &v.last),
        exact(&c.last, &v.last) && (nick(t, &c.first, &v.first) || meta_eq(&c.first, &v.first)),
        exact(&c.first, &v.first) && meta_eq(&c.last, &v.last),
        nick(t, &c.first, &v.first) && meta_eq(&c.last, &v.last),
        exact(&c.first, &v.middle) && exact(&c.last, &v.last),
        nick(t, &c.first, &v.middle) && exact(&c.last, &v.last),
        exact(&c.first, &v.middle) && meta_eq(&c.last, &v.last),
        nick(t, &c.first, &v.middle) && meta_eq(&c.last, &v.last),
        meta_eq(&c.first, &v.first) && meta_eq(&c.last, &v.last),
        meta_eq(&c.first, &v.middle) && exact(&c.last, &v.last),
        meta_eq(&c.first, &v.middle) && meta_eq(&c.last, &v.last),
        exact(&c.last, &v.last) || meta_eq(&c.last, &v.last),
    ]
}

/// The six first-plus-initial classes; each also requires the last initial
/// to match exactly.
fn initial_predicates(c: &NameCandidate, v: &VoterRecord, t: &NicknameTable) -> [bool; 6] {
    let initial_ok = match (fold_name(&c.last).chars().next(), fold_name(&v.last).chars().next()) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    if !initial_ok {
        return [false; 6];
    }
    [
        exact(&c.first, &v.first),
        nick(t, &c.first, &v.first),
        exact(&c.first, &v.middle),
        nick(t, &c.first, &v.middle),
        meta_eq(&c.first, &v.first),
        meta_eq(&c.first, &v.middle),
    ]
}

pub fn oracle_priority(
    candidate: &NameCandidate,
    voter: &VoterRecord,
    table: &NicknameTable,
) -> Option<MatchPriority> {
    let has_first = !candidate.first.trim().is_empty();
    let has_last = !candidate.last.trim().is_empty();
    if candidate.last_is_initial && has_first {
        let classes = initial_predicates(candidate, voter, table);
        let rank = classes.iter().position(|&ok| ok)? as u8 + 1;
        return Some(MatchPriority { lattice: PriorityLattice::FirstPlusInitial, rank });
    }
    if !(has_first && has_last) {
        return None;
    }
    let classes = full_name_predicates(candidate, voter, table);
    let rank = classes.iter().position(|&ok| ok)? as u8 + 1;
    Some(MatchPriority { lattice: PriorityLattice::FullName, rank })
}

#[derive(Debug, PartialEq)]
pub struct OracleResolution {
    pub voter_id: Option<String>,
    pub priority: Option<MatchPriority>,
}

/// Step-5 selection, restated: best class, uniqueness, the complete-last-
/// name + given-name-match requirement for tie-breaking, the last-initial
/// filter, maximum weighted Jaro-Winkler, and tie refusal.
pub fn oracle_resolve(
    candidate: &NameCandidate,
    voters: &[VoterRecord],
    table: &NicknameTable,
) -> OracleResolution {
    let ranked: Vec<(MatchPriority, &VoterRecord)> = voters
        .iter()
        .filter_map(|v| oracle_priority(candidate, v, table).map(|p| (p, v)))
        .collect();
    let Some(best_rank) = ranked.iter().map(|(p, _)| p.rank).min() else {
        return OracleResolution { voter_id: None, priority: None };
    };
    let best: Vec<&(MatchPriority, &VoterRecord)> =
        ranked.iter().filter(|(p, _)| p.rank == best_rank).collect();
    let priority = best[0].0;

    if best.len() == 1 {
        return OracleResolution { voter_id: Some(best[0].1.voter_id.clone()), priority: Some(priority) };
    }

    let complete_last = !candidate.last_is_initial && !candidate.last.trim().is_empty();
    let given_name_match = match priority.lattice {
        PriorityLattice::FullName => priority.rank <= 11,
        PriorityLattice::FirstPlusInitial => true,
    };
    if !complete_last || !given_name_match {
        return OracleResolution { voter_id: None, priority: None };
    }

    let cl = fold_name(&candidate.last);
    let cf = fold_name(&candidate.first);
    let initial = cl.chars().next();
    let finalists: Vec<&&(MatchPriority, &VoterRecord)> = best
        .iter()
        .filter(|(_, v)| fold_name(&v.last).chars().next() == initial)
        .collect();
    if finalists.is_empty() {
        return OracleResolution { voter_id: None, priority: None };
    }
    let scored: Vec<(f64, &VoterRecord)> = finalists
        .iter()
        .map(|(_, v)| (weighted_jw(&cf, &cl, &fold_name(&v.first), &fold_name(&v.last)), *v))
        .collect();
    let max = scored.iter().map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<&VoterRecord> =
        scored.iter().filter(|(s, _)| *s == max).map(|(_, v)| *v).collect();
    if winners.len() != 1 {
        return OracleResolution { voter_id: None, priority: None };
    }
    OracleResolution { voter_id: Some(winners[0].voter_id.clone()), priority: Some(priority) }
}
