//! `gavel report`: headline numbers gathered from completed stages.

use std::fs;
use std::path::Path;

use anyhow::Result;
use serde_json::{json, Value};

use crate::config::Run;
use crate::util::{write_json, write_stage_manifest};

fn load_json(path: &Path) -> Option<Value> {
    fs::read_to_string(path).ok().and_then(|s| serde_json::from_str(&s).ok())
}

fn count_csv_rows(path: &Path) -> Option<usize> {
    fs::read_to_string(path)
        .ok()
        .map(|s| s.lines().count().saturating_sub(1))
}

pub fn run(run: &Run, force: bool) -> Result<()> {
    let mut stages = serde_json::Map::new();
    let mut missing = Vec::new();

    let parsed_dir = run.stage_dir("parsed");
    if parsed_dir.join("run.json").exists() {
        stages.insert(
            "parse".into(),
            json!({
                "meetings_kept": count_csv_rows(&parsed_dir.join("manifest.csv")),
                "parse_errors": count_csv_rows(&parsed_dir.join("errors.csv")),
            }),
        );
    } else {
        missing.push("parse");
    }

    let annotations_dir = run.stage_dir("annotations");
    if annotations_dir.join("run.json").exists() {
        stages.insert(
            "annotate-ingest".into(),
            json!({
                "issue_rows": count_csv_rows(&annotations_dir.join("issues.csv")),
                "speaker_rows": count_csv_rows(&annotations_dir.join("speakers.csv")),
            }),
        );
    } else {
        missing.push("annotate-ingest");
    }

    let linkage_dir = run.stage_dir("linkage");
    if let Some(summary) = load_json(&linkage_dir.join("match_summary.json")) {
        stages.insert(
            "link".into(),
            json!({
                "match_rate": summary.get("match_rate"),
                "n_matched": summary.get("n_matched"),
                "n_candidates": summary.get("n_candidates"),
            }),
        );
    } else {
        missing.push("link");
    }

    let validation_dir = run.stage_dir("validation");
    if let Some(report) = load_json(&validation_dir.join("validation_report.json")) {
        stages.insert(
            "validate".into(),
            json!({
                "issue_precision": report.get("issue_precision"),
                "issue_recall": report.get("issue_recall"),
                "gov_agreement_overall": report
                    .get("gov_confusion")
                    .and_then(|m| m.get("agreement_overall")),
            }),
        );
    } else {
        missing.push("validate");
    }

    let stats_dir = run.stage_dir("stats");
    if let Some(audit) = load_json(&stats_dir.join("unanimity_audit.json")) {
        stages.insert(
            "stats".into(),
            json!({
                "unanimity_raw_share": audit.get("raw").and_then(|r| r.get("share")),
                "unanimity_consent_collapsed_share": audit
                    .get("consent_collapsed")
                    .and_then(|r| r.get("share")),
                "unanimity_ceremonial_excluded_share": audit
                    .get("ceremonial_excluded")
                    .and_then(|r| r.get("share")),
            }),
        );
    } else {
        missing.push("stats");
    }

    let did_dir = run.stage_dir("did");
    if let Some(overall) = load_json(&did_dir.join("att_overall.json")) {
        let twfe = load_json(&did_dir.join("twfe.json"));
        stages.insert(
            "did".into(),
            json!({
                "overall": overall.get("baseline").and_then(|b| b.get("overall")),
                "residualized": overall
                    .get("residualized")
                    .and_then(|r| r.get("overall")),
                "twfe_estimate": twfe.as_ref().and_then(|t| t.get("estimate")),
            }),
        );
    } else {
        missing.push("did");
    }

    let body = json!({
        "stages": Value::Object(stages),
        "missing_stages": missing,
    });
    let stage = run.stage_dir("report");
    let path = stage.join("summary.json");
    write_json(run, &path, body, force)?;
    write_stage_manifest(run, &stage, "report", std::slice::from_ref(&path), force)?;
    println!("report: wrote {}", path.display());
    Ok(())
}
