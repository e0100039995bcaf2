//! Report writing: staging + atomic rename, overwrite protection, and
//! run provenance.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::Run;

/// Writes bytes via a staging file and atomic rename. An existing file with
/// different content is an error unless `force` is set; identical content is
/// left in place.
pub fn write_report(path: &Path, bytes: &[u8], force: bool) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    if path.exists() {
        let existing = fs::read(path)?;
        if existing == bytes {
            return Ok(());
        }
        if !force {
            bail!(
                "refusing to overwrite {} with different content (pass --force to allow)",
                path.display()
            );
        }
    }
    let staging = path.with_extension(format!(
        "{}.staging",
        path.extension().and_then(|e| e.to_str()).unwrap_or("tmp")
    ));
    fs::write(&staging, bytes)
        .with_context(|| format!("writing staging file {}", staging.display()))?;
    fs::rename(&staging, path)
        .with_context(|| format!("renaming into place: {}", path.display()))?;
    Ok(())
}

/// A JSON report wrapper carrying run provenance.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub config_hash: &'a str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub body: T,
}

pub fn write_json<T: Serialize>(run: &Run, path: &Path, body: T, force: bool) -> Result<()> {
    let report = Report {
        config_hash: &run.config_hash,
        version: env!("CARGO_PKG_VERSION"),
        seed: run.seed,
        body,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_report(path, text.as_bytes(), force)
}

/// Per-stage run manifest: provenance plus the files the stage wrote.
#[derive(Serialize)]
pub struct StageManifest {
    pub stage: String,
    pub files: Vec<String>,
}

pub fn write_stage_manifest(run: &Run, stage_dir: &Path, stage: &str, files: &[PathBuf], force: bool) -> Result<()> {
    let mut rel: Vec<String> = files
        .iter()
        .map(|f| {
            f.strip_prefix(stage_dir)
                .unwrap_or(f)
                .to_string_lossy()
                .replace('\\', "/")
        })
        .collect();
    rel.sort();
    write_json(
        run,
        &stage_dir.join("run.json"),
        StageManifest { stage: stage.to_string(), files: rel },
        force,
    )
}

/// Deterministic float formatting for CSV cells.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}
