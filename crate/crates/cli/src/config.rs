//! Declarative pipeline configuration (TOML) and its content hash.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub inputs: Inputs,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub filters: Filters,
    #[serde(default)]
    pub validation: Validation,
    #[serde(default)]
    pub did: Option<DidSpec>,
    #[serde(default)]
    pub stats: StatsSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub transcripts: PathBuf,
    pub annotations: PathBuf,
    pub voters: PathBuf,
    #[serde(default)]
    pub taxonomy: Option<PathBuf>,
    #[serde(default)]
    pub property: Option<PathBuf>,
    #[serde(default)]
    pub nicknames: Option<PathBuf>,
    #[serde(default)]
    pub remote_access: Option<PathBuf>,
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub panel: Option<PathBuf>,
    #[serde(default)]
    pub city_covariates: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Filters {
    pub min_minutes: f64,
    pub max_hours: f64,
}

impl Default for Filters {
    fn default() -> Self {
        Filters { min_minutes: 15.0, max_hours: 15.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Validation {
    pub fuzzy_threshold: f64,
}

impl Default for Validation {
    fn default() -> Self {
        Validation { fuzzy_threshold: 70.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DidSpec {
    /// Label for the outcome column in reports.
    #[serde(default)]
    pub outcome: Option<String>,
    pub bootstrap: usize,
    pub seed: u64,
    /// Panel covariate columns to residualize on (empty: baseline only).
    #[serde(default)]
    pub residualize_on: Vec<String>,
    /// City-covariate columns to median-split treated cities on.
    #[serde(default)]
    pub median_splits: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StatsSpec {
    #[serde(default)]
    pub regressions: Vec<RegressionSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSpec {
    pub name: String,
    /// "ols" or "logit".
    pub family: String,
    /// CSV with one row per observation and named columns.
    pub data: PathBuf,
    pub outcome: String,
    #[serde(default)]
    pub covariates: Vec<String>,
    #[serde(default)]
    pub fixed_effects: Vec<String>,
    pub cluster: String,
}

/// The loaded configuration plus derived run identity.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: Config,
    /// sha256 over the canonical config (paths relative to the config file,
    /// output dir excluded) plus the effective seed.
    pub config_hash: String,
    pub out_root: PathBuf,
    pub seed: Option<u64>,
    pub jobs: usize,
}

impl Run {
    pub fn load(config_path: &Path, out_override: Option<&Path>, seed_override: Option<u64>, jobs: usize) -> Result<Run> {
        let text = fs::read_to_string(config_path)
            .with_context(|| format!("reading config {}", config_path.display()))?;
        let mut config: Config = toml::from_str(&text).context("parsing config")?;

        // Paths are relative to the config file's directory.
        let base = config_path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        rebase(&mut config.inputs.transcripts);
        rebase(&mut config.inputs.annotations);
        rebase(&mut config.inputs.voters);
        for opt in [
            &mut config.inputs.taxonomy,
            &mut config.inputs.property,
            &mut config.inputs.nicknames,
            &mut config.inputs.remote_access,
            &mut config.inputs.labels,
            &mut config.inputs.panel,
            &mut config.inputs.city_covariates,
        ] {
            if let Some(p) = opt.as_mut() {
                rebase(p);
            }
        }
        for spec in &mut config.stats.regressions {
            rebase(&mut spec.data);
        }
        if !out_override.is_some() {
            rebase(&mut config.output.dir);
        }

        for (label, path) in required_paths(&config) {
            if !path.exists() {
                bail!("configured input `{label}` does not exist: {}", path.display());
            }
        }

        let seed = seed_override.or(config.did.as_ref().map(|d| d.seed));
        let config_hash = hash_config(&config, seed)?;
        let out_root = out_override.map(Path::to_path_buf).unwrap_or_else(|| config.output.dir.clone());
        Ok(Run { config, config_hash, out_root, seed, jobs: jobs.max(1) })
    }

    /// Stage directory under the hash-stamped run root.
    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.out_root.join(&self.config_hash[..8]).join(stage)
    }
}

fn required_paths(config: &Config) -> Vec<(&'static str, PathBuf)> {
    let mut paths = vec![
        ("transcripts", config.inputs.transcripts.clone()),
        ("annotations", config.inputs.annotations.clone()),
        ("voters", config.inputs.voters.clone()),
    ];
    for (label, p) in [
        ("taxonomy", &config.inputs.taxonomy),
        ("property", &config.inputs.property),
        ("nicknames", &config.inputs.nicknames),
        ("remote_access", &config.inputs.remote_access),
        ("labels", &config.inputs.labels),
        ("panel", &config.inputs.panel),
        ("city_covariates", &config.inputs.city_covariates),
    ] {
        if let Some(p) = p {
            paths.push((label, p.clone()));
        }
    }
    for spec in &config.stats.regressions {
        paths.push(("stats.regressions.data", spec.data.clone()));
    }
    paths
}

/// Canonical hash: analytic configuration only (the output directory does
/// not change results), with the effective seed folded in.
fn hash_config(config: &Config, seed: Option<u64>) -> Result<String> {
    let mut canonical = config.clone();
    canonical.output = Output::default();
    let payload = serde_json::to_string(&CanonicalRun { config: &canonical, seed })?;
    Ok(hex_digest(payload.as_bytes()))
}

#[derive(Serialize)]
struct CanonicalRun<'a> {
    config: &'a Config,
    seed: Option<u64>,
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
