//! `gavel annotate-ingest`: machine-annotation JSON -> normalized tables.

use anyhow::{bail, Context, Result};

use gavel_core::annotations::write_issue_csv;

use crate::config::Run;
use crate::store::{load_annotations, load_taxonomy};
use crate::util::{fmt_f64, write_report, write_stage_manifest};

pub fn run(run: &Run, force: bool) -> Result<()> {
    let annotations = load_annotations(&run.config.inputs.annotations)?;
    if annotations.is_empty() {
        bail!(
            "no `<meeting>.speakers.json` files under {}",
            run.config.inputs.annotations.display()
        );
    }
    let taxonomy =
        load_taxonomy(run.config.inputs.taxonomy.as_deref(), &run.config.inputs.annotations)?;

    let stage = run.stage_dir("annotations");
    let mut written = Vec::new();

    // Normalized issue table across all meetings.
    let mut issue_bytes: Vec<u8> = Vec::new();
    {
        let mut first = true;
        for meeting in &annotations {
            let mut chunk = Vec::new();
            write_issue_csv(&mut chunk, &meeting.meeting_id, &meeting.issues)
                .with_context(|| format!("issue table for {}", meeting.meeting_id))?;
            if first {
                issue_bytes.extend_from_slice(&chunk);
                first = false;
            } else {
                // Skip the header line on subsequent meetings.
                if let Some(pos) = chunk.iter().position(|&b| b == b'\n') {
                    issue_bytes.extend_from_slice(&chunk[pos + 1..]);
                }
            }
        }
    }
    let issues_path = stage.join("issues.csv");
    write_report(&issues_path, &issue_bytes, force)?;
    written.push(issues_path);

    let mut speakers_csv = String::from("meeting_id,speaker_id,name,gov,group\n");
    for meeting in &annotations {
        for speaker in &meeting.speakers {
            speakers_csv.push_str(&format!(
                "{},{},{},{:?},{:?}\n",
                meeting.meeting_id,
                speaker.speaker_id,
                speaker.name.as_deref().unwrap_or("NA"),
                speaker.gov,
                speaker.group,
            ));
        }
    }
    let speakers_path = stage.join("speakers.csv");
    write_report(&speakers_path, speakers_csv.as_bytes(), force)?;
    written.push(speakers_path);

    let mut stance_csv = String::from("meeting_id,comment_id,score\n");
    for meeting in &annotations {
        for s in &meeting.stance {
            stance_csv.push_str(&format!(
                "{},{},{}\n",
                meeting.meeting_id,
                s.comment_id,
                fmt_f64(s.score)
            ));
        }
    }
    let stance_path = stage.join("stance.csv");
    write_report(&stance_path, stance_csv.as_bytes(), force)?;
    written.push(stance_path);

    if let Some(taxonomy) = &taxonomy {
        let mut taxonomy_csv = String::from("topic_id,title,description\n");
        for entry in &taxonomy.entries {
            taxonomy_csv.push_str(&format!(
                "{},\"{}\",\"{}\"\n",
                entry.topic_id,
                entry.title.replace('"', "'"),
                entry.description.replace('"', "'")
            ));
        }
        let taxonomy_path = stage.join("taxonomy.csv");
        write_report(&taxonomy_path, taxonomy_csv.as_bytes(), force)?;
        written.push(taxonomy_path);
    }

    write_stage_manifest(run, &stage, "annotate-ingest", &written, force)?;
    let n_issues: usize = annotations.iter().map(|m| m.issues.len()).sum();
    let n_speakers: usize = annotations.iter().map(|m| m.speakers.len()).sum();
    println!(
        "annotate-ingest: {} meetings, {} issues, {} speakers{}",
        annotations.len(),
        n_issues,
        n_speakers,
        if taxonomy.is_some() { ", taxonomy validated" } else { "" }
    );
    Ok(())
}
