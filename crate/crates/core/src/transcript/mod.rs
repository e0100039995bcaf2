//! Diarized-transcript parsing, meeting-length filtering, and speaking-time
//! accounting.
//!
//! The accepted text format has two header shapes, documented in the README:
//!
//! ```text
//! SPEAKER_06 (00:01:23 - 00:02:45): Good evening.
//! {SPEAKER_06: 0.70, SPEAKER_00: 0.30} (00:00:00 - 00:00:07): [text]
//! ```
//!
//! A header opens a segment; all following lines up to the next header belong
//! to that segment's text.

mod prompts;

pub use prompts::{render_prompt, PromptError, PromptName, PromptTemplate, RenderedPrompt};

use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whole seconds from meeting start, rendered as `HH:MM:SS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeStamp(pub u32);

impl TimeStamp {
    pub fn from_hms(h: u32, m: u32, s: u32) -> Result<Self, TimestampError> {
        if m > 59 || s > 59 {
            return Err(TimestampError::FieldRange { m, s });
        }
        Ok(TimeStamp(h * 3600 + m * 60 + s))
    }

    pub fn parse(text: &str) -> Result<Self, TimestampError> {
        static TS_RE: LazyLock<Regex> =
            LazyLock::new(|| Regex::new(r"^(\d{2,}):(\d{2}):(\d{2})$").unwrap());
        let caps = TS_RE
            .captures(text)
            .ok_or_else(|| TimestampError::Malformed(text.to_string()))?;
        let h: u32 = caps[1].parse().map_err(|_| TimestampError::Malformed(text.to_string()))?;
        let m: u32 = caps[2].parse().unwrap();
        let s: u32 = caps[3].parse().unwrap();
        Self::from_hms(h, m, s)
    }

    pub fn seconds(self) -> u32 {
        self.0
    }
}

impl fmt::Display for TimeStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}:{:02}", self.0 / 3600, (self.0 / 60) % 60, self.0 % 60)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TimestampError {
    #[error("malformed timestamp `{0}`, expected HH:MM:SS")]
    Malformed(String),
    #[error("minutes/seconds out of range (mm={m}, ss={s})")]
    FieldRange { m: u32, s: u32 },
}

/// One speaker's share of a segment, in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerShare {
    pub speaker_id: String,
    pub fraction: f64,
}

/// A diarized segment: one or more speaker shares, a time span, and text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiarizedSegment {
    pub shares: Vec<SpeakerShare>,
    pub start: TimeStamp,
    pub end: TimeStamp,
    pub text: String,
}

impl DiarizedSegment {
    pub fn duration_secs(&self) -> f64 {
        f64::from(self.end.0 - self.start.0)
    }

    /// Renders the segment header exactly as the parser accepts it in
    /// canonical form.
    pub fn header(&self) -> String {
        if self.shares.len() == 1 && (self.shares[0].fraction - 1.0).abs() < 1e-12 {
            format!("{} ({} - {}):", self.shares[0].speaker_id, self.start, self.end)
        } else {
            let pairs: Vec<String> = self
                .shares
                .iter()
                .map(|s| format!("{}: {:.2}", s.speaker_id, s.fraction))
                .collect();
            format!("{{{}}} ({} - {}):", pairs.join(", "), self.start, self.end)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Youtube,
    Other,
}

/// A parsed meeting: identifying metadata plus ordered segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingRecord {
    pub city: String,
    pub date: String,
    pub channel: Channel,
    pub segments: Vec<DiarizedSegment>,
}

impl MeetingRecord {
    /// Meeting duration in seconds: last segment end minus first segment start.
    pub fn duration_secs(&self) -> f64 {
        match (self.segments.first(), self.segments.last()) {
            (Some(first), Some(last)) => f64::from(last.end.0.saturating_sub(first.start.0)),
            _ => 0.0,
        }
    }

    pub fn speaker_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for seg in &self.segments {
            for share in &seg.shares {
                if !ids.iter().any(|i| i == &share.speaker_id) {
                    ids.push(share.speaker_id.clone());
                }
            }
        }
        ids
    }

    /// Full transcript text in canonical rendering (headers + segment text).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            out.push_str(&seg.header());
            out.push(' ');
            out.push_str(&seg.text);
            out.push('\n');
        }
        out
    }
}

/// A parse problem located at a 1-based line number.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed segment header")]
    MalformedHeader { line: usize },
    #[error("line {line}: {source}")]
    BadTimestamp {
        line: usize,
        #[source]
        source: TimestampError,
    },
    #[error("line {line}: segment end {end} <= start {start}")]
    EndNotAfterStart { line: usize, start: TimeStamp, end: TimeStamp },
    #[error("line {line}: share fractions sum to {sum}, expected 1.0 +/- 1e-6")]
    BadShareSum { line: usize, sum: f64 },
    #[error("line {line}: share fraction {fraction} outside (0, 1]")]
    BadShareFraction { line: usize, fraction: f64 },
    #[error("line {line}: segment has no text")]
    EmptySegmentText { line: usize },
    #[error("line {line}: segment start {start} precedes previous start {prev}")]
    NonMonotonicStart { line: usize, start: TimeStamp, prev: TimeStamp },
    #[error("empty file")]
    EmptyFile,
    #[error("no segment headers found")]
    NoSegments,
}

/// Non-fatal observations from parsing (for example physically meaningful
/// diarization overlap).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTranscript {
    pub segments: Vec<DiarizedSegment>,
    pub warnings: Vec<ParseWarning>,
}

static SINGLE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^(SPEAKER_\d+)[ ]+\([ ]*(\d{2,}:\d{2}:\d{2})[ ]+-[ ]+(\d{2,}:\d{2}:\d{2})[ ]*\)[ ]*:[ ]?(.*)$",
    )
    .unwrap()
});

static MULTI_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^\{[ ]*((?:SPEAKER_\d+[ ]*:[ ]+[0-9]*\.?[0-9]+)(?:,[ ]+SPEAKER_\d+[ ]*:[ ]+[0-9]*\.?[0-9]+)*)[ ]*\}[ ]+\([ ]*(\d{2,}:\d{2}:\d{2})[ ]+-[ ]+(\d{2,}:\d{2}:\d{2})[ ]*\)[ ]*:[ ]?(.*)$",
    )
    .unwrap()
});

static PAIR_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(SPEAKER_\d+)[ ]*:[ ]+([0-9]*\.?[0-9]+)$").unwrap());

// A line that opens like a header but fails the full grammar is reported as
// malformed rather than swallowed into the previous segment's text.
static HEADER_CANDIDATE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:SPEAKER_\d*|\{[^}]*\})\s*\(").unwrap());

const SHARE_SUM_TOL: f64 = 1e-6;

struct PendingSegment {
    line: usize,
    shares: Vec<SpeakerShare>,
    start: TimeStamp,
    end: TimeStamp,
    text_lines: Vec<String>,
}

/// Parses the diarized transcript format, collecting every error rather than
/// stopping at the first.
pub fn parse_transcript(input: &str) -> Result<ParsedTranscript, Vec<ParseError>> {
    if input.trim().is_empty() {
        return Err(vec![ParseError::EmptyFile]);
    }

    let mut errors: Vec<ParseError> = Vec::new();
    let mut warnings: Vec<ParseWarning> = Vec::new();
    let mut segments: Vec<DiarizedSegment> = Vec::new();
    let mut pending: Option<PendingSegment> = None;

    let flush =
        |pending: &mut Option<PendingSegment>, segs: &mut Vec<DiarizedSegment>, errs: &mut Vec<ParseError>| {
            if let Some(p) = pending.take() {
                let text = p.text_lines.join("\n").trim().to_string();
                if text.is_empty() {
                    errs.push(ParseError::EmptySegmentText { line: p.line });
                    return;
                }
                segs.push(DiarizedSegment { shares: p.shares, start: p.start, end: p.end, text });
            }
        };

    for (idx, raw_line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim_end();

        let header = parse_header(line, lineno);
        match header {
            HeaderParse::NotAHeader => {
                if let Some(p) = pending.as_mut() {
                    p.text_lines.push(line.to_string());
                }
                // Leading prose before the first header is ignored.
            }
            HeaderParse::Malformed(errs) => {
                flush(&mut pending, &mut segments, &mut errors);
                errors.extend(errs);
            }
            HeaderParse::Segment { shares, start, end, inline_text } => {
                flush(&mut pending, &mut segments, &mut errors);
                if let Some(prev) = segments.last().map(|s| s.start).or(pending.as_ref().map(|p| p.start))
                {
                    if start < prev {
                        errors.push(ParseError::NonMonotonicStart { line: lineno, start, prev });
                    }
                }
                if let Some(prev_end) = segments.last().map(|s| s.end) {
                    if start < prev_end {
                        warnings.push(ParseWarning {
                            line: lineno,
                            message: format!(
                                "segment starting {start} overlaps previous segment ending {prev_end}"
                            ),
                        });
                    }
                }
                let mut text_lines = Vec::new();
                if !inline_text.trim().is_empty() {
                    text_lines.push(inline_text);
                }
                pending = Some(PendingSegment { line: lineno, shares, start, end, text_lines });
            }
        }
    }
    flush(&mut pending, &mut segments, &mut errors);

    if errors.is_empty() && segments.is_empty() {
        return Err(vec![ParseError::NoSegments]);
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(ParsedTranscript { segments, warnings })
}

enum HeaderParse {
    NotAHeader,
    Malformed(Vec<ParseError>),
    Segment { shares: Vec<SpeakerShare>, start: TimeStamp, end: TimeStamp, inline_text: String },
}

fn parse_header(line: &str, lineno: usize) -> HeaderParse {
    let (shares, start_str, end_str, rest) = if let Some(caps) = SINGLE_RE.captures(line) {
        let shares =
            vec![SpeakerShare { speaker_id: caps[1].to_string(), fraction: 1.0 }];
        (shares, caps[2].to_string(), caps[3].to_string(), caps[4].to_string())
    } else if let Some(caps) = MULTI_RE.captures(line) {
        let mut shares = Vec::new();
        for pair in caps[1].split(',') {
            let pair = pair.trim();
            let Some(pc) = PAIR_RE.captures(pair) else {
                return HeaderParse::Malformed(vec![ParseError::MalformedHeader { line: lineno }]);
            };
            let fraction: f64 = match pc[2].parse() {
                Ok(f) => f,
                Err(_) => {
                    return HeaderParse::Malformed(vec![ParseError::MalformedHeader {
                        line: lineno,
                    }])
                }
            };
            shares.push(SpeakerShare { speaker_id: pc[1].to_string(), fraction });
        }
        (shares, caps[2].to_string(), caps[3].to_string(), caps[4].to_string())
    } else if HEADER_CANDIDATE_RE.is_match(line) {
        return HeaderParse::Malformed(vec![ParseError::MalformedHeader { line: lineno }]);
    } else {
        return HeaderParse::NotAHeader;
    };

    let mut errors = Vec::new();
    let start = match TimeStamp::parse(&start_str) {
        Ok(ts) => Some(ts),
        Err(e) => {
            errors.push(ParseError::BadTimestamp { line: lineno, source: e });
            None
        }
    };
    let end = match TimeStamp::parse(&end_str) {
        Ok(ts) => Some(ts),
        Err(e) => {
            errors.push(ParseError::BadTimestamp { line: lineno, source: e });
            None
        }
    };
    for share in &shares {
        if share.fraction <= 0.0 || share.fraction > 1.0 {
            errors.push(ParseError::BadShareFraction { line: lineno, fraction: share.fraction });
        }
    }
    let sum: f64 = shares.iter().map(|s| s.fraction).sum();
    if (sum - 1.0).abs() > SHARE_SUM_TOL {
        errors.push(ParseError::BadShareSum { line: lineno, sum });
    }
    if let (Some(s), Some(e)) = (start, end) {
        if e <= s {
            errors.push(ParseError::EndNotAfterStart { line: lineno, start: s, end: e });
        }
    }
    if !errors.is_empty() {
        return HeaderParse::Malformed(errors);
    }
    HeaderParse::Segment { shares, start: start.unwrap(), end: end.unwrap(), inline_text: rest }
}

/// Closed meeting-length bounds: 15 minutes to 15 hours.
pub const MIN_MEETING_SECS: f64 = 15.0 * 60.0;
pub const MAX_MEETING_SECS: f64 = 15.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    TooShort,
    TooLong,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::TooShort => write!(f, "too short"),
            DropReason::TooLong => write!(f, "too long"),
        }
    }
}

/// Partitions meetings into kept (duration within the closed
/// [15 min, 15 h] interval) and dropped-with-reason.
pub fn filter_meetings(
    meetings: Vec<MeetingRecord>,
) -> (Vec<MeetingRecord>, Vec<(MeetingRecord, DropReason)>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for meeting in meetings {
        let dur = meeting.duration_secs();
        if dur < MIN_MEETING_SECS {
            dropped.push((meeting, DropReason::TooShort));
        } else if dur > MAX_MEETING_SECS {
            dropped.push((meeting, DropReason::TooLong));
        } else {
            kept.push(meeting);
        }
    }
    (kept, dropped)
}

/// Seconds attributed to `speaker_id`: sum over segments of
/// `(end - start) * fraction`. Unknown speakers get 0.
pub fn speaking_time(meeting: &MeetingRecord, speaker_id: &str) -> f64 {
    meeting
        .segments
        .iter()
        .map(|seg| {
            let dur = seg.duration_secs();
            seg.shares
                .iter()
                .filter(|s| s.speaker_id == speaker_id)
                .map(|s| dur * s.fraction)
                .sum::<f64>()
        })
        .sum()
}

/// Total segment time in seconds (the additivity target for
/// [`speaking_time`] summed over all speakers).
pub fn total_segment_time(meeting: &MeetingRecord) -> f64 {
    meeting.segments.iter().map(|s| s.duration_secs()).sum()
}
