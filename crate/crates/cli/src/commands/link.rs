//! `gavel link`: speaker names -> voter-file matches.

use std::collections::BTreeMap;
use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;

use gavel_core::annotations::GovStatus;
use gavel_core::linkage::{
    match_address, read_voter_csv, verify_in_transcript, MatchResult, NameCandidate,
    NicknameTable, Ownership, PropertyTable, Verification, VoterIndex,
};

use crate::config::Run;
use crate::store::{load_annotations, read_meeting_store};
use crate::util::{fmt_f64, write_json, write_report, write_stage_manifest};

#[derive(Serialize)]
struct MatchSummary {
    n_candidates: usize,
    n_rejected_by_transcript: usize,
    n_matched: usize,
    match_rate: Option<f64>,
    by_priority: BTreeMap<String, usize>,
    fallback_matches: usize,
}

pub fn run(run: &Run, force: bool) -> Result<()> {
    let meetings = read_meeting_store(&run.stage_dir("parsed"))?;
    let annotations = load_annotations(&run.config.inputs.annotations)?;

    let voters_file = fs::File::open(&run.config.inputs.voters)
        .with_context(|| run.config.inputs.voters.display().to_string())?;
    let voters = read_voter_csv(voters_file)?;
    let index = VoterIndex::build(voters);

    let nicknames = match &run.config.inputs.nicknames {
        Some(path) => NicknameTable::from_reader(fs::File::open(path)?)?,
        None => NicknameTable::builtin(),
    };
    let property = match &run.config.inputs.property {
        Some(path) => Some(PropertyTable::from_reader(fs::File::open(path)?)?),
        None => None,
    };

    let mut rows: Vec<(String, MatchResult)> = Vec::new();
    let mut rejected = 0usize;
    for meeting in &meetings {
        let Some(annot) = annotations.iter().find(|a| a.meeting_id == meeting.meeting_id) else {
            continue;
        };
        let transcript_text = meeting.record.render();
        let year = meeting.year()?;
        for speaker in &annot.speakers {
            // Only named members of the public head into linkage.
            if speaker.gov != GovStatus::NG {
                continue;
            }
            let Some(name) = &speaker.name else {
                continue;
            };
            let Some(candidate) = NameCandidate::from_display_name(
                name,
                &meeting.record.city,
                year,
                &speaker.speaker_id,
            ) else {
                continue;
            };
            let key = format!("{}:{}", meeting.meeting_id, speaker.speaker_id);
            match verify_in_transcript(candidate, &transcript_text) {
                Verification::Accepted(verified) => {
                    let result = index.link(&verified, &nicknames);
                    rows.push((key, result));
                }
                Verification::Rejected { .. } => rejected += 1,
            }
        }
    }

    let stage = run.stage_dir("linkage");
    let mut written = Vec::new();

    let mut match_bytes = Vec::new();
    gavel_core::linkage::write_match_csv(
        &mut match_bytes,
        rows.iter().map(|(k, r)| (k.as_str(), r)),
    )?;
    let matches_path = stage.join("matches.csv");
    write_report(&matches_path, &match_bytes, force)?;
    written.push(matches_path);

    // Demographics for matched speakers, with address-based ownership.
    let mut demo_csv =
        String::from("speaker_key,voter_id,city,year,age,gender,party,ethnicity,owner\n");
    for (key, result) in &rows {
        if let Some(voter) = &result.voter {
            let owner = match &property {
                Some(table) => match match_address(&voter.address, table) {
                    Ownership::Owner => "true",
                    Ownership::NotOwner => "false",
                    Ownership::Unknown => "",
                },
                None => "",
            };
            demo_csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                key,
                voter.voter_id,
                voter.city,
                voter.year,
                voter.age.map(|a| fmt_f64(a)).unwrap_or_default(),
                voter.gender,
                voter.party,
                voter.ethnicity,
                owner,
            ));
        }
    }
    let demo_path = stage.join("matched_demographics.csv");
    write_report(&demo_path, demo_csv.as_bytes(), force)?;
    written.push(demo_path);

    let n_matched = rows.iter().filter(|(_, r)| r.is_matched()).count();
    let mut by_priority: BTreeMap<String, usize> = BTreeMap::new();
    let mut fallback_matches = 0usize;
    for (_, result) in &rows {
        if let Some(priority) = result.priority {
            *by_priority
                .entry(format!("{}:{}", priority.lattice.name(), priority.rank))
                .or_insert(0) += 1;
        }
        if result.is_matched() && result.fallback_year != 0 {
            fallback_matches += 1;
        }
    }
    let summary = MatchSummary {
        n_candidates: rows.len() + rejected,
        n_rejected_by_transcript: rejected,
        n_matched,
        match_rate: if rows.is_empty() {
            None
        } else {
            Some(n_matched as f64 / rows.len() as f64)
        },
        by_priority,
        fallback_matches,
    };
    let summary_path = stage.join("match_summary.json");
    write_json(run, &summary_path, &summary, force)?;
    written.push(summary_path);
    write_stage_manifest(run, &stage, "link", &written, force)?;

    println!(
        "link: {} candidates, {} matched ({}), {} via adjacent year",
        summary.n_candidates,
        n_matched,
        summary
            .match_rate
            .map(|r| format!("{:.1}%", 100.0 * r))
            .unwrap_or_else(|| "rate undefined".into()),
        summary.fallback_matches,
    );
    Ok(())
}
