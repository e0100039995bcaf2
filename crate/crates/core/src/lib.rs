//! Core library for turning diarized city-council transcripts and their
//! machine annotations into linked, analyzable records.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`transcript`] — parse and filter the diarized transcript text format,
//!   render prompt templates against parsed meetings.
//! - [`annotations`] — ingest machine-annotation JSON (speaker maps, issue
//!   lists, topic taxonomy, stance scores) and the vote/ceremonial/consent
//!   classification logic.
//! - [`linkage`] — fuzzy record linkage from extracted speaker names to a
//!   voter file, address-based ownership matching, balance diagnostics.
//! - [`validation`] — machine-vs-human agreement metrics: confusion matrices,
//!   fuzzy name agreement, set-level precision/recall, greedy issue matching.
//! - [`stats`] — Welch tests, fixed-effects OLS/logit with cluster-robust
//!   errors, EWMA series, kernel densities, participation summaries.
//! - [`did`] — staggered-adoption difference-in-differences: group-time ATTs
//!   with not-yet-treated controls, event-study and overall aggregation,
//!   cluster bootstrap inference.

pub mod annotations;
pub mod did;
pub mod linkage;
pub mod stats;
pub mod transcript;
pub mod validation;

pub use transcript::TimeStamp;
