//! `gavel did`: staggered-adoption estimates from the panel CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use gavel_core::did::{
    cluster_bootstrap, median_split, read_panel_csv, residualize, twfe_beta, DidAnalysis, Panel,
    PanelObservation,
};

use crate::config::Run;
use crate::store::ColumnTable;
use crate::util::{fmt_f64, write_json, write_report, write_stage_manifest};

pub fn run(run: &Run, force: bool) -> Result<()> {
    let Some(did) = &run.config.did else {
        bail!("config has no [did] section");
    };
    let panel_path = run
        .config
        .inputs
        .panel
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [inputs].panel CSV for the did stage"))?;
    let seed = run.seed.ok_or_else(|| anyhow!("a seed is required for the bootstrap"))?;

    let file = fs::File::open(panel_path).with_context(|| panel_path.display().to_string())?;
    let (observations, covariate_names) = read_panel_csv(file)?;
    let panel = Panel::from_observations(&observations, &covariate_names)?;

    let stage = run.stage_dir("did");
    let mut written: Vec<PathBuf> = Vec::new();

    let baseline = cluster_bootstrap(&panel, did.bootstrap, seed)?;

    // Residualized specification when covariates are configured.
    let mut residualized: Option<(DidAnalysis, Vec<String>)> = None;
    if !did.residualize_on.is_empty() {
        for name in &did.residualize_on {
            if !covariate_names.contains(name) {
                bail!(
                    "residualize_on column `{name}` not in panel covariates ({})",
                    covariate_names.join(", ")
                );
            }
        }
        let restricted = restrict_covariates(&observations, &covariate_names, &did.residualize_on)?;
        let (residual_panel, dropped) = residualize(&restricted)?;
        let analysis = cluster_bootstrap(&residual_panel, did.bootstrap, seed)?;
        residualized = Some((analysis, dropped));
    }

    let mut cells_csv = String::from(
        "specification,cohort,period,event_time,estimate,se,n_treated,n_control\n",
    );
    let mut event_csv =
        String::from("specification,event_time,estimate,se,ci_lower,ci_upper,n_cells\n");
    let mut specs: Vec<(&str, &DidAnalysis)> = vec![("baseline", &baseline)];
    if let Some((analysis, _)) = &residualized {
        specs.push(("residualized", analysis));
    }
    for (label, analysis) in &specs {
        for cell in &analysis.cells {
            cells_csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                label,
                cell.cohort,
                cell.period,
                cell.event_time(),
                fmt_f64(cell.estimate),
                cell.se.map(fmt_f64).unwrap_or_default(),
                cell.n_treated,
                cell.n_control
            ));
        }
        for point in analysis.event_study.points.values() {
            event_csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                label,
                point.event_time,
                fmt_f64(point.estimate),
                point.se.map(fmt_f64).unwrap_or_default(),
                point.ci_lower.map(fmt_f64).unwrap_or_default(),
                point.ci_upper.map(fmt_f64).unwrap_or_default(),
                point.n_cells
            ));
        }
    }
    let cells_path = stage.join("att_cells.csv");
    write_report(&cells_path, cells_csv.as_bytes(), force)?;
    written.push(cells_path);
    let event_path = stage.join("event_study.csv");
    write_report(&event_path, event_csv.as_bytes(), force)?;
    written.push(event_path);

    let overall = json!({
        "outcome": did.outcome,
        "baseline": {
            "overall": baseline.overall,
            "bootstrap": baseline.bootstrap,
        },
        "residualized": residualized.as_ref().map(|(analysis, dropped)| json!({
            "overall": analysis.overall,
            "bootstrap": analysis.bootstrap,
            "dropped_collinear": dropped,
            "covariates": did.residualize_on,
        })),
    });
    let overall_path = stage.join("att_overall.json");
    write_json(run, &overall_path, overall, force)?;
    written.push(overall_path);

    let twfe = twfe_beta(&panel)?;
    let twfe_path = stage.join("twfe.json");
    write_json(run, &twfe_path, &twfe, force)?;
    written.push(twfe_path);

    if !did.median_splits.is_empty() {
        let splits = heterogeneity(run, did, &panel, &residualized, seed)?;
        let het_path = stage.join("heterogeneity.json");
        write_json(run, &het_path, json!({ "splits": splits }), force)?;
        written.push(het_path);
    }

    write_stage_manifest(run, &stage, "did", &written, force)?;
    println!(
        "did: overall ATT {} (se {}), twfe {}",
        fmt_f64(baseline.overall.estimate),
        baseline.overall.se.map(fmt_f64).unwrap_or_default(),
        fmt_f64(twfe.estimate),
    );
    Ok(())
}

fn restrict_covariates(
    observations: &[PanelObservation],
    covariate_names: &[String],
    keep: &[String],
) -> Result<Panel> {
    let indices: Vec<usize> = keep
        .iter()
        .map(|name| covariate_names.iter().position(|c| c == name).unwrap())
        .collect();
    let restricted: Vec<PanelObservation> = observations
        .iter()
        .map(|o| PanelObservation {
            covariates: indices.iter().map(|&i| o.covariates[i]).collect(),
            ..o.clone()
        })
        .collect();
    Ok(Panel::from_observations(&restricted, keep)?)
}

#[derive(Serialize)]
struct SplitSide {
    n_cities: usize,
    overall: Option<gavel_core::did::OverallAtt>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SplitReport {
    characteristic: String,
    median: f64,
    excluded_treated_cities: Vec<String>,
    degenerate: bool,
    above: SplitSide,
    below: SplitSide,
}

fn heterogeneity(
    run: &Run,
    did: &crate::config::DidSpec,
    baseline_panel: &Panel,
    residualized: &Option<(DidAnalysis, Vec<String>)>,
    seed: u64,
) -> Result<Vec<SplitReport>> {
    let city_cov_path = run
        .config
        .inputs
        .city_covariates
        .as_ref()
        .ok_or_else(|| anyhow!("median_splits need [inputs].city_covariates"))?;
    let table = ColumnTable::read(city_cov_path)?;
    let cities = table.string_column("city")?;

    // Splits run on the residualized outcome when that specification is
    // configured, mirroring the covariate-adjusted heterogeneity tables.
    let split_panel: Panel = match residualized {
        Some(_) => {
            let restricted = restrict_covariates(
                &baseline_panel.observations(),
                baseline_panel.covariate_names(),
                &did.residualize_on,
            )?;
            residualize(&restricted)?.0
        }
        None => baseline_panel.clone(),
    };

    let mut reports = Vec::new();
    for characteristic in &did.median_splits {
        let values = table.numeric_column(characteristic)?;
        let map: BTreeMap<String, f64> = cities
            .iter()
            .zip(values.iter())
            .filter(|(_, v)| v.is_finite())
            .map(|(c, v)| (c.clone(), *v))
            .collect();
        let split = median_split(&split_panel, &map)?;
        let side = |panel: &Panel| -> SplitSide {
            let n_cities = panel.n_cities();
            match cluster_bootstrap(panel, did.bootstrap, seed) {
                Ok(analysis) => {
                    SplitSide { n_cities, overall: Some(analysis.overall), error: None }
                }
                Err(err) => SplitSide { n_cities, overall: None, error: Some(err.to_string()) },
            }
        };
        reports.push(SplitReport {
            characteristic: characteristic.clone(),
            median: split.median,
            excluded_treated_cities: split.excluded.clone(),
            degenerate: split.degenerate,
            above: side(&split.above),
            below: side(&split.below),
        });
    }
    Ok(reports)
}
