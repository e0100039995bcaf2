//! On-disk interchange between pipeline stages.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use gavel_core::annotations::{
    parse_issue_list, parse_speaker_map, parse_stance_scores, parse_taxonomy, IssueAnnotation,
    SpeakerAnnotation, StanceScore, TopicTaxonomy,
};
use gavel_core::transcript::{Channel, MeetingRecord};

/// One parsed meeting in the newline-delimited store.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoredMeeting {
    pub meeting_id: String,
    #[serde(flatten)]
    pub record: MeetingRecord,
}

impl StoredMeeting {
    /// Calendar year from the meeting date (YYYY-MM-DD).
    pub fn year(&self) -> Result<i32> {
        self.record.date[..4]
            .parse()
            .with_context(|| format!("meeting {} has unparseable date", self.meeting_id))
    }
}

/// Transcript filenames follow `<city>_<YYYY-MM-DD>.txt`, with `.yt.txt`
/// marking meetings sourced from a video channel.
pub fn meeting_identity(path: &Path) -> Result<(String, String, String, Channel)> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| anyhow!("bad transcript filename: {}", path.display()))?;
    let stem = name
        .strip_suffix(".txt")
        .ok_or_else(|| anyhow!("transcript files must end in .txt: {name}"))?;
    let (stem, channel) = match stem.strip_suffix(".yt") {
        Some(s) => (s, Channel::Youtube),
        None => (stem, Channel::Other),
    };
    let (city, date) = stem
        .rsplit_once('_')
        .ok_or_else(|| anyhow!("expected <city>_<YYYY-MM-DD>.txt, got {name}"))?;
    if date.len() != 10 || date.as_bytes()[4] != b'-' || date.as_bytes()[7] != b'-' {
        bail!("expected date YYYY-MM-DD in transcript name {name}");
    }
    Ok((stem.to_string(), city.to_string(), date.to_string(), channel))
}

pub fn list_transcripts(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = WalkDir::new(dir)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("txt"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn render_meeting_store(meetings: &[StoredMeeting]) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    for meeting in meetings {
        serde_json::to_writer(&mut bytes, meeting)?;
        bytes.write_all(b"\n")?;
    }
    Ok(bytes)
}

pub fn read_meeting_store(parsed_dir: &Path) -> Result<Vec<StoredMeeting>> {
    let path = parsed_dir.join("meetings.ndjson");
    if !path.exists() {
        bail!(
            "missing parsed meeting store {} (run `gavel parse` first)",
            path.display()
        );
    }
    let reader = BufReader::new(fs::File::open(&path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let meeting: StoredMeeting = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        out.push(meeting);
    }
    Ok(out)
}

/// Machine annotations for one meeting.
#[derive(Debug, Clone)]
pub struct MeetingAnnotations {
    pub meeting_id: String,
    pub speakers: Vec<SpeakerAnnotation>,
    pub issues: Vec<IssueAnnotation>,
    pub stance: Vec<StanceScore>,
}

/// Loads `<id>.speakers.json` and `<id>.issues.json` (plus optional
/// `<id>.stance.json`) for every meeting id present in the directory.
pub fn load_annotations(dir: &Path) -> Result<Vec<MeetingAnnotations>> {
    let mut ids: Vec<String> = fs::read_dir(dir)
        .with_context(|| format!("reading annotations dir {}", dir.display()))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .filter_map(|name| name.strip_suffix(".speakers.json").map(str::to_string))
        .collect();
    ids.sort();

    let mut out = Vec::new();
    for meeting_id in ids {
        let speakers_path = dir.join(format!("{meeting_id}.speakers.json"));
        let issues_path = dir.join(format!("{meeting_id}.issues.json"));
        let stance_path = dir.join(format!("{meeting_id}.stance.json"));

        let speakers = parse_speaker_map(&fs::read_to_string(&speakers_path)?)
            .with_context(|| speakers_path.display().to_string())?;
        let issues = if issues_path.exists() {
            parse_issue_list(&fs::read_to_string(&issues_path)?)
                .with_context(|| issues_path.display().to_string())?
        } else {
            Vec::new()
        };
        let stance = if stance_path.exists() {
            parse_stance_scores(&fs::read_to_string(&stance_path)?)
                .with_context(|| stance_path.display().to_string())?
        } else {
            Vec::new()
        };
        out.push(MeetingAnnotations { meeting_id, speakers, issues, stance });
    }
    Ok(out)
}

pub fn load_taxonomy(explicit: Option<&Path>, annotations_dir: &Path) -> Result<Option<TopicTaxonomy>> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let fallback = annotations_dir.join("taxonomy.json");
            if !fallback.exists() {
                return Ok(None);
            }
            fallback
        }
    };
    let taxonomy =
        parse_taxonomy(&fs::read_to_string(&path)?).with_context(|| path.display().to_string())?;
    Ok(Some(taxonomy))
}

/// Reads a named-column CSV into string cells for the generic regression
/// front end.
pub struct ColumnTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ColumnTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in rdr.records() {
            rows.push(record?.iter().map(str::to_string).collect());
        }
        Ok(ColumnTable { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("column `{name}` not found (have: {})", self.headers.join(", ")))
    }

    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .map(|row| {
                let cell = row.get(idx).map(String::as_str).unwrap_or("");
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse::<f64>()
                        .map_err(|_| anyhow!("column `{name}`: bad numeric value `{cell}`"))
                }
            })
            .collect()
    }

    pub fn string_column(&self, name: &str) -> Result<Vec<String>> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|row| row.get(idx).cloned().unwrap_or_default()).collect())
    }
}
