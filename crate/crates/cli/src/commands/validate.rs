//! `gavel validate`: machine annotations vs human labels.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use gavel_core::validation::{
    confusion_matrix, greedy_issue_match, name_agreement, read_labeled_issues,
    read_labeled_speakers, set_precision_recall, ConfusionMatrix, GreedyMatchOutcome, GovLabel,
    LabelSource, LabeledIssue, NameAgreement, NameMatchMode, SetMatchCounts,
};

use crate::config::Run;
use crate::util::{fmt_f64, write_json, write_report, write_stage_manifest};

#[derive(Serialize)]
struct GovConfusion {
    cells: Vec<(String, String, usize)>,
    total: usize,
    agreement_gov_rows: f64,
    agreement_overall: f64,
}

#[derive(Serialize)]
struct MeetingIssueValidation {
    meeting_id: String,
    ra_issues: usize,
    llm_issues: usize,
    matched_pairs: usize,
    ra_only: usize,
    llm_only: usize,
    mean_iou: Option<f64>,
    agendized_agreement: Option<f64>,
    vote_agreement: Option<f64>,
    tally_agreement: Option<f64>,
    stage_agreement: Option<f64>,
}

#[derive(Serialize)]
struct ValidationReport {
    n_meetings: usize,
    gov_confusion: Option<GovConfusion>,
    name_agreement: Option<NameAgreement>,
    set_full: SetCounts,
    set_last: SetCounts,
    issue_recall: Option<f64>,
    issue_precision: Option<f64>,
    meetings: Vec<MeetingIssueValidation>,
    /// Greedy tie-break: descending score, then ascending (ra, llm) index.
    tie_break_rule: &'static str,
}

#[derive(Serialize)]
struct SetCounts {
    matched_llm: usize,
    total_llm: usize,
    matched_ra: usize,
    total_ra: usize,
    precision: Option<f64>,
    recall: Option<f64>,
}

impl From<SetMatchCounts> for SetCounts {
    fn from(c: SetMatchCounts) -> Self {
        SetCounts {
            matched_llm: c.matched_llm,
            total_llm: c.total_llm,
            matched_ra: c.matched_ra,
            total_ra: c.total_ra,
            precision: (c.total_llm > 0).then(|| c.precision()),
            recall: (c.total_ra > 0).then(|| c.recall()),
        }
    }
}

fn label_dir(run: &Run) -> Result<&Path> {
    run.config
        .inputs
        .labels
        .as_deref()
        .ok_or_else(|| anyhow::anyhow!("config has no [inputs].labels directory"))
}

pub fn run(run: &Run, force: bool) -> Result<()> {
    let labels = label_dir(run)?;
    let threshold = run.config.validation.fuzzy_threshold;

    let mut meeting_ids: Vec<String> = fs::read_dir(labels)
        .with_context(|| format!("reading labels dir {}", labels.display()))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .filter_map(|name| name.strip_suffix(".speakers.csv").map(str::to_string))
        .collect();
    meeting_ids.sort();
    if meeting_ids.is_empty() {
        bail!("no `<meeting>.speakers.csv` label files under {}", labels.display());
    }

    let mut gov_pairs: Vec<(String, String)> = Vec::new();
    let mut both_named: Vec<(String, String)> = Vec::new();
    let mut set_full = SetMatchCounts::default();
    let mut set_last = SetMatchCounts::default();
    let mut meetings = Vec::new();
    let mut pair_rows =
        String::from("meeting_id,ra_index,llm_index,iou,title_sim,score,ra_title,llm_title\n");
    let mut total_matched = 0usize;
    let mut total_ra_issues = 0usize;
    let mut total_llm_issues = 0usize;

    for meeting_id in &meeting_ids {
        let speakers =
            read_labeled_speakers(fs::File::open(labels.join(format!("{meeting_id}.speakers.csv")))?)?;
        for s in &speakers {
            gov_pairs.push((s.ra_gov.as_str().to_string(), s.llm_gov.as_str().to_string()));
            if let (Some(ra), Some(llm)) = (&s.ra_name, &s.llm_name) {
                both_named.push((ra.clone(), llm.clone()));
            }
        }
        let ra_names: Vec<String> = unique_names(speakers.iter().filter_map(|s| s.ra_name.clone()));
        let llm_names: Vec<String> =
            unique_names(speakers.iter().filter_map(|s| s.llm_name.clone()));
        set_full.add(set_precision_recall(&ra_names, &llm_names, threshold, NameMatchMode::Full));
        set_last.add(set_precision_recall(&ra_names, &llm_names, threshold, NameMatchMode::Last));

        let issues_path = labels.join(format!("{meeting_id}.issues.csv"));
        if !issues_path.exists() {
            continue;
        }
        let all_issues = read_labeled_issues(fs::File::open(&issues_path)?)?;
        let ra: Vec<LabeledIssue> =
            all_issues.iter().filter(|i| i.source == LabelSource::Ra).cloned().collect();
        let llm: Vec<LabeledIssue> =
            all_issues.iter().filter(|i| i.source == LabelSource::Llm).cloned().collect();
        let outcome = greedy_issue_match(&ra, &llm);
        total_matched += outcome.pairs.len();
        total_ra_issues += ra.len();
        total_llm_issues += llm.len();

        for pair in &outcome.pairs {
            pair_rows.push_str(&format!(
                "{},{},{},{},{},{},\"{}\",\"{}\"\n",
                meeting_id,
                pair.ra_index,
                pair.llm_index,
                fmt_f64(pair.iou),
                fmt_f64(pair.title_sim),
                fmt_f64(pair.score),
                ra[pair.ra_index].title.replace('"', "'"),
                llm[pair.llm_index].title.replace('"', "'"),
            ));
        }
        meetings.push(meeting_summary(meeting_id, &ra, &llm, &outcome));
    }

    let gov_confusion = build_gov_confusion(&gov_pairs)?;
    let agreement =
        (!both_named.is_empty()).then(|| name_agreement(&both_named, threshold));

    let report = ValidationReport {
        n_meetings: meeting_ids.len(),
        gov_confusion,
        name_agreement: agreement,
        set_full: set_full.into(),
        set_last: set_last.into(),
        issue_recall: (total_ra_issues > 0).then(|| total_matched as f64 / total_ra_issues as f64),
        issue_precision: (total_llm_issues > 0)
            .then(|| total_matched as f64 / total_llm_issues as f64),
        meetings,
        tie_break_rule: "score desc, then (ra index, llm index) asc",
    };

    let stage = run.stage_dir("validation");
    let mut written = Vec::new();
    let report_path = stage.join("validation_report.json");
    write_json(run, &report_path, &report, force)?;
    written.push(report_path);
    let pairs_path = stage.join("issue_pairs.csv");
    write_report(&pairs_path, pair_rows.as_bytes(), force)?;
    written.push(pairs_path);
    write_stage_manifest(run, &stage, "validate", &written, force)?;

    println!(
        "validate: {} meetings, issue precision {} recall {}",
        meeting_ids.len(),
        report.issue_precision.map(|v| format!("{:.3}", v)).unwrap_or_else(|| "-".into()),
        report.issue_recall.map(|v| format!("{:.3}", v)).unwrap_or_else(|| "-".into()),
    );
    Ok(())
}

fn unique_names(names: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for name in names {
        if !out.iter().any(|n| n.eq_ignore_ascii_case(&name)) {
            out.push(name);
        }
    }
    out.sort();
    out
}

fn build_gov_confusion(pairs: &[(String, String)]) -> Result<Option<GovConfusion>> {
    if pairs.is_empty() {
        return Ok(None);
    }
    let matrix: ConfusionMatrix =
        confusion_matrix(pairs.iter().map(|(t, p)| (t.as_str(), p.as_str())))?;
    let cells = matrix
        .counts
        .iter()
        .map(|((t, p), &n)| (t.clone(), p.clone(), n))
        .collect();
    Ok(Some(GovConfusion {
        cells,
        total: matrix.total,
        agreement_gov_rows: matrix.agreement_over(&[GovLabel::G.as_str(), GovLabel::NG.as_str()]),
        agreement_overall: matrix.agreement_overall(),
    }))
}

fn meeting_summary(
    meeting_id: &str,
    ra: &[LabeledIssue],
    llm: &[LabeledIssue],
    outcome: &GreedyMatchOutcome,
) -> MeetingIssueValidation {
    let mut iou_sum = 0.0;
    let mut agend = (0usize, 0usize);
    let mut vote = (0usize, 0usize);
    let mut tally = (0usize, 0usize);
    let mut stage = (0usize, 0usize);
    for pair in &outcome.pairs {
        iou_sum += pair.iou;
        let (r, l) = (&ra[pair.ra_index], &llm[pair.llm_index]);
        if let (Some(a), Some(b)) = (r.agendized, l.agendized) {
            agend.1 += 1;
            agend.0 += usize::from(a == b);
        }
        if let (Some(a), Some(b)) = (r.vote, l.vote) {
            vote.1 += 1;
            vote.0 += usize::from(a == b);
        }
        if let (Some(a), Some(b)) = (r.vote_res, l.vote_res) {
            tally.1 += 1;
            tally.0 += usize::from(a == b);
        }
        if let (Some(a), Some(b)) = (&r.vote_stage, &l.vote_stage) {
            stage.1 += 1;
            stage.0 += usize::from(a == b);
        }
    }
    let rate = |(num, den): (usize, usize)| (den > 0).then(|| num as f64 / den as f64);
    MeetingIssueValidation {
        meeting_id: meeting_id.to_string(),
        ra_issues: ra.len(),
        llm_issues: llm.len(),
        matched_pairs: outcome.pairs.len(),
        ra_only: outcome.ra_only.len(),
        llm_only: outcome.llm_only.len(),
        mean_iou: (!outcome.pairs.is_empty()).then(|| iou_sum / outcome.pairs.len() as f64),
        agendized_agreement: rate(agend),
        vote_agreement: rate(vote),
        tally_agreement: rate(tally),
        stage_agreement: rate(stage),
    }
}
