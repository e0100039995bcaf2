//! Remote-participation coding ingestion and coverage summary.
//!
//! Input CSV: `city,access,first_remote_month,shutoff_month` where `access`
//! is one of `live`, `email_only`, `insufficient`, month fields are `YYYY-MM`
//! (empty when not applicable), and `shutoff_month` empty for cities still
//! offering live remote comment.

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: bad month `{value}`, expected YYYY-MM")]
    BadMonth { row: usize, value: String },
    #[error("row {row}: unknown access kind `{value}`")]
    BadAccess { row: usize, value: String },
    #[error("row {row}: shutoff month precedes first remote month")]
    ShutoffBeforeStart { row: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u8,
}

impl YearMonth {
    pub fn parse(s: &str) -> Option<Self> {
        let (y, m) = s.split_once('-')?;
        if y.len() != 4 || m.len() != 2 {
            return None;
        }
        let year: i32 = y.parse().ok()?;
        let month: u8 = m.parse().ok()?;
        if !(1..=12).contains(&month) {
            return None;
        }
        Some(YearMonth { year, month })
    }

    /// Zero-based month index usable as a panel time coordinate.
    pub fn index(self) -> i32 {
        self.year * 12 + i32::from(self.month) - 1
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessKind {
    /// Live synchronous remote participation (video or phone).
    Live,
    /// Written or recorded submissions only.
    EmailOnly,
    /// Not enough information to code the format.
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemoteAccessRecord {
    pub city: String,
    pub access: AccessKind,
    pub first_remote_month: Option<YearMonth>,
    pub shutoff_month: Option<YearMonth>,
}

impl RemoteAccessRecord {
    /// Treatment cohort month for the shutoff panel, when the city ever
    /// offered and later eliminated live remote access.
    pub fn cohort_index(&self) -> Option<i32> {
        match (self.access, self.shutoff_month) {
            (AccessKind::Live, Some(m)) => Some(m.index()),
            _ => None,
        }
    }
}

pub fn parse_remote_access_csv<R: io::Read>(reader: R) -> Result<Vec<RemoteAccessRecord>, RemoteError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 2; // header is row 1
        let record = row?;
        let get = |idx: usize| record.get(idx).unwrap_or("").trim().to_string();
        let access = match get(1).as_str() {
            "live" => AccessKind::Live,
            "email_only" => AccessKind::EmailOnly,
            "insufficient" => AccessKind::Insufficient,
            other => return Err(RemoteError::BadAccess { row: row_no, value: other.to_string() }),
        };
        let parse_month = |value: String| -> Result<Option<YearMonth>, RemoteError> {
            if value.is_empty() {
                Ok(None)
            } else {
                YearMonth::parse(&value)
                    .map(Some)
                    .ok_or(RemoteError::BadMonth { row: row_no, value })
            }
        };
        let first_remote_month = parse_month(get(2))?;
        let shutoff_month = parse_month(get(3))?;
        if let (Some(f), Some(s)) = (first_remote_month, shutoff_month) {
            if s < f {
                return Err(RemoteError::ShutoffBeforeStart { row: row_no });
            }
        }
        out.push(RemoteAccessRecord { city: get(0), access, first_remote_month, shutoff_month });
    }
    Ok(out)
}

/// Coverage summary over the coded sample: the funnel, return-to-in-person
/// status, and shutoff timing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemoteCoverage {
    pub n_cities: usize,
    pub email_only: usize,
    pub insufficient: usize,
    pub ever_live: usize,
    pub ever_live_share: f64,
    pub returned_in_person: usize,
    pub still_offering: usize,
    pub earliest_return: Option<YearMonth>,
    pub mean_months_remote: Option<f64>,
    pub returns_by_year: BTreeMap<i32, usize>,
}

pub fn remote_coverage(records: &[RemoteAccessRecord]) -> RemoteCoverage {
    let n_cities = records.len();
    let email_only = records.iter().filter(|r| r.access == AccessKind::EmailOnly).count();
    let insufficient = records.iter().filter(|r| r.access == AccessKind::Insufficient).count();
    let live: Vec<&RemoteAccessRecord> =
        records.iter().filter(|r| r.access == AccessKind::Live).collect();
    let ever_live = live.len();
    let returned: Vec<&&RemoteAccessRecord> =
        live.iter().filter(|r| r.shutoff_month.is_some()).collect();

    let mut returns_by_year = BTreeMap::new();
    let mut durations = Vec::new();
    let mut earliest_return: Option<YearMonth> = None;
    for r in &returned {
        let shutoff = r.shutoff_month.unwrap();
        *returns_by_year.entry(shutoff.year).or_insert(0) += 1;
        if earliest_return.is_none_or(|e| shutoff < e) {
            earliest_return = Some(shutoff);
        }
        if let Some(first) = r.first_remote_month {
            durations.push(f64::from(shutoff.index() - first.index()));
        }
    }
    let mean_months_remote = if durations.is_empty() {
        None
    } else {
        Some(durations.iter().sum::<f64>() / durations.len() as f64)
    };

    RemoteCoverage {
        n_cities,
        email_only,
        insufficient,
        ever_live,
        ever_live_share: if n_cities == 0 { f64::NAN } else { ever_live as f64 / n_cities as f64 },
        returned_in_person: returned.len(),
        still_offering: ever_live - returned.len(),
        earliest_return,
        mean_months_remote,
        returns_by_year,
    }
}
