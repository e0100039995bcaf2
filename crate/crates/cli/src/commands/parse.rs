//! `gavel parse`: transcript directory -> meeting store + manifest.

use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;

use anyhow::{bail, Result};

use gavel_core::transcript::{parse_transcript, MeetingRecord};

use crate::config::Run;
use crate::store::{list_transcripts, meeting_identity, render_meeting_store, StoredMeeting};
use crate::util::{fmt_f64, write_report, write_stage_manifest};

struct FileOutcome {
    path: PathBuf,
    meeting: Option<StoredMeeting>,
    errors: Vec<String>,
    warnings: usize,
}

pub fn run(run: &Run, force: bool) -> Result<()> {
    let files = list_transcripts(&run.config.inputs.transcripts)?;
    if files.is_empty() {
        bail!(
            "no .txt transcripts under {}",
            run.config.inputs.transcripts.display()
        );
    }

    // File-level parallelism; results are re-sorted by path before writing
    // so worker count cannot change the output.
    let queue = Mutex::new(files.clone().into_iter());
    let outcomes = Mutex::new(Vec::<FileOutcome>::new());
    std::thread::scope(|scope| {
        for _ in 0..run.jobs {
            scope.spawn(|| loop {
                let Some(path) = queue.lock().unwrap().next() else {
                    break;
                };
                let outcome = parse_one(&path);
                outcomes.lock().unwrap().push(outcome);
            });
        }
    });
    let mut outcomes = outcomes.into_inner().unwrap();
    outcomes.sort_by(|a, b| a.path.cmp(&b.path));

    let parsed: Vec<&FileOutcome> = outcomes.iter().filter(|o| o.meeting.is_some()).collect();
    if parsed.is_empty() {
        bail!("zero parseable transcripts (every file failed)");
    }

    let meetings: Vec<MeetingRecord> =
        parsed.iter().map(|o| o.meeting.as_ref().unwrap().record.clone()).collect();
    let min_secs = run.config.filters.min_minutes * 60.0;
    let max_secs = run.config.filters.max_hours * 3600.0;

    let stage = run.stage_dir("parsed");
    let mut written = Vec::new();

    // Manifest: one row per input file with its disposition.
    let mut manifest = String::from("file,meeting_id,status,reason,segments,duration_secs,warnings\n");
    let mut kept: Vec<StoredMeeting> = Vec::new();
    for (outcome, record) in parsed.iter().zip(meetings.iter()) {
        let stored = outcome.meeting.as_ref().unwrap();
        let duration = record.duration_secs();
        let (status, reason) = if duration < min_secs {
            ("dropped", "too short")
        } else if duration > max_secs {
            ("dropped", "too long")
        } else {
            kept.push(stored.clone());
            ("kept", "")
        };
        manifest.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            outcome.path.file_name().unwrap().to_string_lossy(),
            stored.meeting_id,
            status,
            reason,
            record.segments.len(),
            fmt_f64(duration),
            outcome.warnings,
        ));
    }
    for outcome in outcomes.iter().filter(|o| o.meeting.is_none()) {
        manifest.push_str(&format!(
            "{},,failed,parse errors,0,,0\n",
            outcome.path.file_name().unwrap().to_string_lossy()
        ));
    }

    let mut errors_csv = String::from("file,error\n");
    for outcome in &outcomes {
        for err in &outcome.errors {
            errors_csv.push_str(&format!(
                "{},\"{}\"\n",
                outcome.path.file_name().unwrap().to_string_lossy(),
                err.replace('"', "'")
            ));
        }
    }

    let store_path = stage.join("meetings.ndjson");
    write_report(&store_path, &render_meeting_store(&kept)?, force)?;
    written.push(store_path);
    let manifest_path = stage.join("manifest.csv");
    write_report(&manifest_path, manifest.as_bytes(), force)?;
    written.push(manifest_path);
    let errors_path = stage.join("errors.csv");
    write_report(&errors_path, errors_csv.as_bytes(), force)?;
    written.push(errors_path);
    write_stage_manifest(run, &stage, "parse", &written, force)?;

    println!(
        "parse: {} files, {} kept, {} dropped by filter, {} failed",
        outcomes.len(),
        kept.len(),
        parsed.len() - kept.len(),
        outcomes.len() - parsed.len(),
    );
    Ok(())
}

fn parse_one(path: &PathBuf) -> FileOutcome {
    let identity = match meeting_identity(path) {
        Ok(id) => id,
        Err(err) => {
            return FileOutcome { path: path.clone(), meeting: None, errors: vec![err.to_string()], warnings: 0 }
        }
    };
    let (meeting_id, city, date, channel) = identity;
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(err) => {
            return FileOutcome { path: path.clone(), meeting: None, errors: vec![err.to_string()], warnings: 0 }
        }
    };
    match parse_transcript(&text) {
        Ok(parsed) => FileOutcome {
            path: path.clone(),
            meeting: Some(StoredMeeting {
                meeting_id,
                record: MeetingRecord { city, date, channel, segments: parsed.segments },
            }),
            errors: Vec::new(),
            warnings: parsed.warnings.len(),
        },
        Err(errors) => FileOutcome {
            path: path.clone(),
            meeting: None,
            errors: errors.iter().map(|e| e.to_string()).collect(),
            warnings: 0,
        },
    }
}
