//! `gavel stats`: descriptive tables and regression fits.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;
use serde_json::json;

use gavel_core::annotations::{
    agenda_topic_proportions, keyword_rate, parse_remote_access_csv, remote_coverage,
    topic_shares, unanimity_audit, GovStatus, KeywordTopic,
};
use gavel_core::linkage::{match_address, read_voter_csv, Ownership, PropertyTable, VoterRecord};
use gavel_core::stats::{
    ewma, fe_logit, fe_ols, participation_rate_by_age, repeat_summary, stance_summary,
    stance_summary_grouped, welch_t, FitOptions, Kde, ObservationMatrix, RegressionFit,
};

use crate::config::{RegressionSpec, Run};
use crate::store::{load_annotations, read_meeting_store, ColumnTable, MeetingAnnotations, StoredMeeting};
use crate::util::{fmt_f64, write_json, write_report, write_stage_manifest};

const EWMA_ALPHA: f64 = 0.01;

pub fn run(run: &Run, force: bool) -> Result<()> {
    let meetings = read_meeting_store(&run.stage_dir("parsed"))?;
    let annotations = load_annotations(&run.config.inputs.annotations)?;
    let voters = read_voter_csv(fs::File::open(&run.config.inputs.voters)?)?;
    let property = match &run.config.inputs.property {
        Some(path) => Some(PropertyTable::from_reader(fs::File::open(path)?)?),
        None => None,
    };
    let matches = read_matched_demographics(run).unwrap_or_default();

    let stage = run.stage_dir("stats");
    let mut written: Vec<PathBuf> = Vec::new();

    // Unanimity audit over the pooled issue list, in meeting order.
    let mut all_issues = Vec::new();
    for meeting in &meetings {
        if let Some(a) = annotations.iter().find(|a| a.meeting_id == meeting.meeting_id) {
            all_issues.extend(a.issues.iter().cloned());
        }
    }
    let audit = unanimity_audit(&all_issues);
    let path = stage.join("unanimity_audit.json");
    write_json(run, &path, &audit, force)?;
    written.push(path);

    written.push(write_topic_shares(run, &stage, &meetings, &annotations, force)?);
    written.push(write_agenda_proportions(run, &stage, &meetings, &annotations, force)?);
    written.push(write_ewma(run, &stage, &meetings, &annotations, force)?);
    written.push(write_keyword_rates(run, &stage, &meetings, force)?);
    written.push(write_balance(run, &stage, &voters, &matches, property.as_ref(), force)?);
    written.push(write_participation_by_age(run, &stage, &voters, &matches, force)?);

    // Repeat participation over matched (voter, city) pairs.
    let mut counts: BTreeMap<(String, String), u32> = BTreeMap::new();
    for m in &matches {
        *counts.entry((m.voter_id.clone(), m.city.clone())).or_insert(0) += 1;
    }
    let count_values: Vec<u32> = counts.values().copied().collect();
    let repeat = repeat_summary(&count_values);
    let path = stage.join("repeat_summary.json");
    write_json(run, &path, &repeat, force)?;
    written.push(path);

    written.push(write_stance_summary(run, &stage, &meetings, &annotations, force)?);

    if let Some(kde_path) = write_age_kde(run, &stage, &matches, force)? {
        written.push(kde_path);
    }

    if let Some(remote_path) = &run.config.inputs.remote_access {
        let records = parse_remote_access_csv(fs::File::open(remote_path)?)?;
        let coverage = remote_coverage(&records);
        let path = stage.join("remote_coverage.json");
        write_json(run, &path, &coverage, force)?;
        written.push(path);
    }

    if let Some(city_cov) = &run.config.inputs.city_covariates {
        written.push(write_city_ols(run, &stage, city_cov.clone(), &voters, &matches, force)?);
    }

    // Built-in regressions, then config-driven ones.
    let mut regression_files = Vec::new();
    regression_files.push(write_regression(
        run,
        &stage,
        "participation_logit",
        participation_logit(&voters, &matches, property.as_ref()),
        force,
    )?);
    regression_files.push(write_regression(
        run,
        &stage,
        "repeat_logit",
        repeat_logit(&voters, &matches),
        force,
    )?);
    regression_files.push(write_regression(
        run,
        &stage,
        "demo_topic_twfe",
        demo_topic_twfe(&meetings, &annotations),
        force,
    )?);
    for spec in &run.config.stats.regressions {
        regression_files.push(write_regression(
            run,
            &stage,
            &spec.name,
            generic_regression(spec),
            force,
        )?);
    }
    for pair in regression_files {
        written.extend(pair);
    }

    write_stage_manifest(run, &stage, "stats", &written, force)?;
    println!("stats: wrote {} reports under {}", written.len(), stage.display());
    Ok(())
}

pub struct MatchedRow {
    pub speaker_key: String,
    pub voter_id: String,
    pub city: String,
    pub year: i32,
    pub age: Option<f64>,
    pub gender: String,
    pub party: String,
    pub ethnicity: String,
    pub owner: Option<bool>,
}

pub fn read_matched_demographics(run: &Run) -> Result<Vec<MatchedRow>> {
    let path = run.stage_dir("linkage").join("matched_demographics.csv");
    if !path.exists() {
        anyhow::bail!("missing {} (run `gavel link` first)", path.display());
    }
    let table = ColumnTable::read(&path)?;
    let mut out = Vec::new();
    for row in &table.rows {
        let get = |name: &str| -> String {
            table
                .column_index(name)
                .ok()
                .and_then(|i| row.get(i).cloned())
                .unwrap_or_default()
        };
        out.push(MatchedRow {
            speaker_key: get("speaker_key"),
            voter_id: get("voter_id"),
            city: get("city"),
            year: get("year").parse().unwrap_or(0),
            age: get("age").parse().ok(),
            gender: get("gender"),
            party: get("party"),
            ethnicity: get("ethnicity"),
            owner: match get("owner").as_str() {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            },
        });
    }
    out.sort_by(|a, b| a.speaker_key.cmp(&b.speaker_key));
    Ok(out)
}

fn write_topic_shares(
    run: &Run,
    stage: &std::path::Path,
    meetings: &[StoredMeeting],
    annotations: &[MeetingAnnotations],
    force: bool,
) -> Result<PathBuf> {
    let mut csv = String::from("meeting_id,side,topic_id,share\n");
    for meeting in meetings {
        let Some(a) = annotations.iter().find(|a| a.meeting_id == meeting.meeting_id) else {
            continue;
        };
        for (side, agendized) in [("agendized", true), ("public_comment", false)] {
            let (shares, _warnings) = topic_shares(&a.issues, agendized);
            for (topic, share) in shares {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    meeting.meeting_id,
                    side,
                    topic,
                    fmt_f64(share)
                ));
            }
        }
    }
    let path = stage.join("topic_shares.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(path)
}

fn write_agenda_proportions(
    run: &Run,
    stage: &std::path::Path,
    meetings: &[StoredMeeting],
    annotations: &[MeetingAnnotations],
    force: bool,
) -> Result<PathBuf> {
    let mut csv = String::from("meeting_id,topic_id,proportion\n");
    for meeting in meetings {
        let Some(a) = annotations.iter().find(|a| a.meeting_id == meeting.meeting_id) else {
            continue;
        };
        for (topic, p) in agenda_topic_proportions(&a.issues) {
            csv.push_str(&format!("{},{},{}\n", meeting.meeting_id, topic, fmt_f64(p)));
        }
    }
    let path = stage.join("agenda_proportions.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(path)
}

fn write_ewma(
    run: &Run,
    stage: &std::path::Path,
    meetings: &[StoredMeeting],
    annotations: &[MeetingAnnotations],
    force: bool,
) -> Result<PathBuf> {
    // Meetings in date order define the time axis; missing topics count as
    // zero share in that meeting.
    let mut ordered: Vec<&StoredMeeting> = meetings.iter().collect();
    ordered.sort_by(|a, b| (&a.record.date, &a.meeting_id).cmp(&(&b.record.date, &b.meeting_id)));

    let mut csv = String::from("side,topic_id,seq,meeting_id,date,share,ewma\n");
    for (side, agendized) in [("agendized", true), ("public_comment", false)] {
        let mut topics: BTreeSet<u8> = BTreeSet::new();
        let mut per_meeting: Vec<(&StoredMeeting, BTreeMap<u8, f64>)> = Vec::new();
        for meeting in &ordered {
            let shares = annotations
                .iter()
                .find(|a| a.meeting_id == meeting.meeting_id)
                .map(|a| topic_shares(&a.issues, agendized).0)
                .unwrap_or_default();
            topics.extend(shares.keys().copied());
            per_meeting.push((meeting, shares));
        }
        for topic in topics {
            let series: Vec<f64> = per_meeting
                .iter()
                .map(|(_, shares)| shares.get(&topic).copied().unwrap_or(0.0))
                .collect();
            let smoothed = ewma(&series, EWMA_ALPHA)?;
            for (seq, ((meeting, _), (raw, smooth))) in
                per_meeting.iter().zip(series.iter().zip(smoothed.iter())).enumerate()
            {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    side,
                    topic,
                    seq,
                    meeting.meeting_id,
                    meeting.record.date,
                    fmt_f64(*raw),
                    fmt_f64(*smooth)
                ));
            }
        }
    }
    let path = stage.join("ewma_topic_shares.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(path)
}

fn write_keyword_rates(
    run: &Run,
    stage: &std::path::Path,
    meetings: &[StoredMeeting],
    force: bool,
) -> Result<PathBuf> {
    let mut csv = String::from("meeting_id,topic,rate_per_1000_words\n");
    for meeting in meetings {
        let text: String = meeting
            .record
            .segments
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        for topic in KeywordTopic::ALL {
            if let Ok(rate) = keyword_rate(&text, topic) {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    meeting.meeting_id,
                    topic.name(),
                    fmt_f64(rate)
                ));
            }
        }
    }
    let path = stage.join("keyword_rates.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(path)
}

/// Demographic variables derived from a voter row.
fn voter_variables(v: &VoterRecord, property: Option<&PropertyTable>) -> Vec<(&'static str, Option<f64>)> {
    let flag = |b: bool| Some(if b { 1.0 } else { 0.0 });
    let owner = property.and_then(|table| match match_address(&v.address, table) {
        Ownership::Owner => Some(1.0),
        Ownership::NotOwner => Some(0.0),
        Ownership::Unknown => None,
    });
    vec![
        ("age", v.age),
        ("female", flag(v.gender == "F")),
        ("democrat", flag(v.party == "D")),
        ("white", flag(v.ethnicity == "W")),
        ("owner", owner),
    ]
}

fn write_balance(
    run: &Run,
    stage: &std::path::Path,
    voters: &[VoterRecord],
    matches: &[MatchedRow],
    property: Option<&PropertyTable>,
    force: bool,
) -> Result<PathBuf> {
    let participant_ids: HashSet<(&str, i32)> =
        matches.iter().map(|m| (m.voter_id.as_str(), m.year)).collect();

    let mut csv = String::from(
        "variable,n_participants,mean_participants,n_nonparticipants,mean_nonparticipants,difference,std_diff,welch_t,welch_p\n",
    );
    for variable in ["age", "female", "democrat", "white", "owner"] {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for voter in voters {
            let value = voter_variables(voter, property)
                .into_iter()
                .find(|(name, _)| *name == variable)
                .and_then(|(_, v)| v);
            let Some(value) = value else { continue };
            if participant_ids.contains(&(voter.voter_id.as_str(), voter.year)) {
                a.push(value);
            } else {
                b.push(value);
            }
        }
        let std_diff = gavel_core::linkage::standardized_difference(&a, &b).ok();
        let welch = welch_t(&a, &b).ok();
        let mean = |xs: &[f64]| {
            if xs.is_empty() {
                f64::NAN
            } else {
                xs.iter().sum::<f64>() / xs.len() as f64
            }
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            variable,
            a.len(),
            fmt_f64(mean(&a)),
            b.len(),
            fmt_f64(mean(&b)),
            fmt_f64(mean(&a) - mean(&b)),
            std_diff.map(fmt_f64).unwrap_or_default(),
            welch.map(|w| fmt_f64(w.t)).unwrap_or_default(),
            welch.map(|w| fmt_f64(w.p_value)).unwrap_or_default(),
        ));
    }
    let path = stage.join("balance.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(path)
}

fn write_participation_by_age(
    run: &Run,
    stage: &std::path::Path,
    voters: &[VoterRecord],
    matches: &[MatchedRow],
    force: bool,
) -> Result<PathBuf> {
    let voter_ages: Vec<u32> = voters.iter().filter_map(|v| v.age.map(|a| a as u32)).collect();
    let participant_ages: Vec<u32> =
        matches.iter().filter_map(|m| m.age.map(|a| a as u32)).collect();
    let rates = participation_rate_by_age(&voter_ages, &participant_ages);

    let mut csv = String::from("age,rate\n");
    for (age, rate) in rates {
        csv.push_str(&format!("{},{}\n", age, rate.map(fmt_f64).unwrap_or_default()));
    }
    let path = stage.join("participation_by_age.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(path)
}

fn write_stance_summary(
    run: &Run,
    stage: &std::path::Path,
    meetings: &[StoredMeeting],
    annotations: &[MeetingAnnotations],
    force: bool,
) -> Result<PathBuf> {
    let mut all_scores = Vec::new();
    let mut by_city: Vec<(String, f64)> = Vec::new();
    for meeting in meetings {
        let Some(a) = annotations.iter().find(|a| a.meeting_id == meeting.meeting_id) else {
            continue;
        };
        for s in &a.stance {
            all_scores.push(s.score);
            by_city.push((meeting.record.city.clone(), s.score));
        }
    }
    let body = json!({
        "overall": stance_summary(&all_scores),
        "by_city": stance_summary_grouped(by_city.iter().map(|(c, s)| (c.as_str(), *s))),
    });
    let path = stage.join("stance_summary.json");
    write_json(run, &path, body, force)?;
    Ok(path)
}

fn write_age_kde(
    run: &Run,
    stage: &std::path::Path,
    matches: &[MatchedRow],
    force: bool,
) -> Result<Option<PathBuf>> {
    let ages: Vec<f64> = matches.iter().filter_map(|m| m.age).collect();
    let distinct: HashSet<u64> = ages.iter().map(|a| a.to_bits()).collect();
    if distinct.len() < 2 {
        return Ok(None);
    }
    let kde = Kde::silverman(&ages)?;
    let grid = kde.default_grid(101, 3.0);
    let density = kde.evaluate_grid(&grid);
    let mut csv = String::from("age,density\n");
    for (x, d) in grid.iter().zip(density.iter()) {
        csv.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*d)));
    }
    let path = stage.join("kde_participant_ages.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(Some(path))
}

fn write_city_ols(
    run: &Run,
    stage: &std::path::Path,
    city_cov_path: PathBuf,
    voters: &[VoterRecord],
    matches: &[MatchedRow],
    force: bool,
) -> Result<PathBuf> {
    let table = ColumnTable::read(&city_cov_path)?;
    let cities = table.string_column("city")?;

    // Participation per 1,000 registered voters, by city.
    let mut registered: HashMap<String, usize> = HashMap::new();
    for v in voters {
        *registered.entry(gavel_core::linkage::fold_name(&v.city)).or_insert(0) += 1;
    }
    let mut participants: HashMap<String, HashSet<&str>> = HashMap::new();
    for m in matches {
        participants
            .entry(gavel_core::linkage::fold_name(&m.city))
            .or_default()
            .insert(m.voter_id.as_str());
    }
    let rate_of = |city: &str| -> Option<f64> {
        let key = gavel_core::linkage::fold_name(city);
        let reg = registered.get(&key).copied()?;
        let part = participants.get(&key).map(|s| s.len()).unwrap_or(0);
        Some(1000.0 * part as f64 / reg as f64)
    };

    let mut csv = String::from("covariate,slope,se,p_value,n_cities\n");
    for covariate in table.headers.iter().filter(|h| *h != "city") {
        let values = table.numeric_column(covariate)?;
        let mut outcome = Vec::new();
        let mut x = Vec::new();
        let mut cluster = Vec::new();
        for (city, &value) in cities.iter().zip(values.iter()) {
            if let Some(rate) = rate_of(city) {
                if value.is_finite() {
                    outcome.push(rate);
                    x.push(value);
                    cluster.push(city.clone());
                }
            }
        }
        if outcome.len() < 3 {
            continue;
        }
        let fit = fe_ols(
            &ObservationMatrix {
                outcome,
                covariates: vec![(covariate.clone(), x)],
                fixed_effects: vec![],
                cluster,
            },
            FitOptions::default(),
        );
        if let Ok(fit) = fit {
            if let Some(coef) = fit.coefficient(covariate) {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    covariate,
                    fmt_f64(coef.estimate),
                    fmt_f64(coef.se),
                    fmt_f64(coef.p_value),
                    fit.n_obs
                ));
            }
        }
    }
    let path = stage.join("city_ols.csv");
    write_report(&path, csv.as_bytes(), force)?;
    let _ = run;
    Ok(path)
}

fn participation_logit(
    voters: &[VoterRecord],
    matches: &[MatchedRow],
    property: Option<&PropertyTable>,
) -> Result<(ObservationMatrix, &'static str)> {
    let participant_ids: HashSet<(&str, i32)> =
        matches.iter().map(|m| (m.voter_id.as_str(), m.year)).collect();
    let mut table = ObservationMatrix {
        outcome: Vec::new(),
        covariates: vec![
            ("age".into(), Vec::new()),
            ("female".into(), Vec::new()),
            ("democrat".into(), Vec::new()),
            ("white".into(), Vec::new()),
            ("owner".into(), Vec::new()),
        ],
        fixed_effects: vec![("city".into(), Vec::new()), ("year".into(), Vec::new())],
        cluster: Vec::new(),
    };
    for v in voters {
        let participated =
            participant_ids.contains(&(v.voter_id.as_str(), v.year));
        table.outcome.push(if participated { 1.0 } else { 0.0 });
        for (slot, (_, value)) in
            table.covariates.iter_mut().zip(voter_variables(v, property))
        {
            slot.1.push(value.unwrap_or(f64::NAN));
        }
        table.fixed_effects[0].1.push(v.city.clone());
        table.fixed_effects[1].1.push(v.year.to_string());
        table.cluster.push(v.city.clone());
    }
    drop_empty_covariates(&mut table);
    Ok((table, "logit"))
}

/// Covariates with no finite values (for example ownership without a
/// property file) would delete every row; drop the column instead.
fn drop_empty_covariates(table: &mut ObservationMatrix) {
    table.covariates.retain(|(_, values)| values.iter().any(|v| v.is_finite()));
}

fn repeat_logit(voters: &[VoterRecord], matches: &[MatchedRow]) -> Result<(ObservationMatrix, &'static str)> {
    // One row per matched (voter, city); repeater when they appear in more
    // than one meeting there.
    let mut counts: BTreeMap<(String, String), u32> = BTreeMap::new();
    for m in matches {
        *counts.entry((m.voter_id.clone(), m.city.clone())).or_insert(0) += 1;
    }
    let by_id: HashMap<(&str, i32), &VoterRecord> =
        voters.iter().map(|v| ((v.voter_id.as_str(), v.year), v)).collect();

    let mut table = ObservationMatrix {
        outcome: Vec::new(),
        covariates: vec![
            ("age".into(), Vec::new()),
            ("female".into(), Vec::new()),
            ("democrat".into(), Vec::new()),
            ("white".into(), Vec::new()),
            ("owner".into(), Vec::new()),
        ],
        fixed_effects: vec![("city".into(), Vec::new())],
        cluster: Vec::new(),
    };
    for ((voter_id, city), count) in &counts {
        // Demographics from the first matched appearance.
        let Some(row) = matches.iter().find(|m| &m.voter_id == voter_id && &m.city == city) else {
            continue;
        };
        let voter = by_id.get(&(voter_id.as_str(), row.year));
        table.outcome.push(if *count > 1 { 1.0 } else { 0.0 });
        table.covariates[0].1.push(row.age.unwrap_or(f64::NAN));
        table.covariates[1].1.push(match voter {
            Some(v) => f64::from(u8::from(v.gender == "F")),
            None => f64::from(u8::from(row.gender == "F")),
        });
        table.covariates[2].1.push(f64::from(u8::from(row.party == "D")));
        table.covariates[3].1.push(f64::from(u8::from(row.ethnicity == "W")));
        table.covariates[4].1.push(match row.owner {
            Some(flag) => f64::from(u8::from(flag)),
            None => f64::NAN,
        });
        table.fixed_effects[0].1.push(city.clone());
        table.cluster.push(city.clone());
    }
    drop_empty_covariates(&mut table);
    Ok((table, "logit"))
}

fn demo_topic_twfe(
    meetings: &[StoredMeeting],
    annotations: &[MeetingAnnotations],
) -> Result<(ObservationMatrix, &'static str)> {
    let mut table = ObservationMatrix {
        outcome: Vec::new(),
        covariates: (0u8..10)
            .map(|t| (format!("topic_{t}"), Vec::new()))
            .collect(),
        fixed_effects: vec![("city".into(), Vec::new()), ("year".into(), Vec::new())],
        cluster: Vec::new(),
    };
    for meeting in meetings {
        let Some(a) = annotations.iter().find(|a| a.meeting_id == meeting.meeting_id) else {
            continue;
        };
        let proportions = agenda_topic_proportions(&a.issues);
        if proportions.is_empty() {
            continue;
        }
        let public_speakers =
            a.speakers.iter().filter(|s| s.gov == GovStatus::NG).count() as f64;
        table.outcome.push(public_speakers);
        for t in 0u8..10 {
            table.covariates[t as usize].1.push(proportions.get(&t).copied().unwrap_or(0.0));
        }
        table.fixed_effects[0].1.push(meeting.record.city.clone());
        table.fixed_effects[1].1.push(meeting.record.date[..4].to_string());
        table.cluster.push(meeting.record.city.clone());
    }
    Ok((table, "ols"))
}

fn generic_regression(spec: &RegressionSpec) -> Result<(ObservationMatrix, &'static str)> {
    let table = ColumnTable::read(&spec.data)?;
    let outcome = table.numeric_column(&spec.outcome)?;
    let covariates = spec
        .covariates
        .iter()
        .map(|name| Ok((name.clone(), table.numeric_column(name)?)))
        .collect::<Result<Vec<_>>>()?;
    let fixed_effects = spec
        .fixed_effects
        .iter()
        .map(|name| Ok((name.clone(), table.string_column(name)?)))
        .collect::<Result<Vec<_>>>()?;
    let cluster = table.string_column(&spec.cluster)?;
    let family = match spec.family.as_str() {
        "ols" => "ols",
        "logit" => "logit",
        other => anyhow::bail!("regression `{}`: unknown family `{other}`", spec.name),
    };
    Ok((ObservationMatrix { outcome, covariates, fixed_effects, cluster }, family))
}

#[derive(Serialize)]
struct RegressionReport {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<RegressionFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    column_missingness: BTreeMap<String, usize>,
}

fn write_regression(
    run: &Run,
    stage: &std::path::Path,
    name: &str,
    build: Result<(ObservationMatrix, &'static str)>,
    force: bool,
) -> Result<Vec<PathBuf>> {
    let dir = stage.join("regressions");
    let json_path = dir.join(format!("{name}.json"));
    let csv_path = dir.join(format!("{name}_coefficients.csv"));

    let report = match build {
        Ok((table, family)) => {
            let column_missingness = table
                .covariates
                .iter()
                .map(|(col, values)| {
                    (col.clone(), values.iter().filter(|v| !v.is_finite()).count())
                })
                .collect();
            let fit = match family {
                "logit" => fe_logit(&table, FitOptions::default()),
                _ => fe_ols(&table, FitOptions::default()),
            };
            match fit {
                Ok(fit) => RegressionReport {
                    name: name.to_string(),
                    fit: Some(fit),
                    error: None,
                    column_missingness,
                },
                Err(err) => RegressionReport {
                    name: name.to_string(),
                    fit: None,
                    error: Some(err.to_string()),
                    column_missingness,
                },
            }
        }
        Err(err) => RegressionReport {
            name: name.to_string(),
            fit: None,
            error: Some(format!("{err:#}")),
            column_missingness: BTreeMap::new(),
        },
    };

    write_json(run, &json_path, &report, force)?;
    let mut csv = String::from("term,estimate,se,p_value\n");
    if let Some(fit) = &report.fit {
        for coef in &fit.coefficients {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                coef.name,
                fmt_f64(coef.estimate),
                fmt_f64(coef.se),
                fmt_f64(coef.p_value)
            ));
        }
    }
    write_report(&csv_path, csv.as_bytes(), force)?;
    Ok(vec![json_path, csv_path])
}
