//! Keyword-family mention rates per 1,000 words.

use std::sync::LazyLock;

use regex::{Regex, RegexBuilder};
use serde::Serialize;
use thiserror::Error;

/// The eight keyword families tracked in land-use rhetoric comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KeywordTopic {
    Parking,
    Traffic,
    Affordability,
    Crime,
    Schools,
    Infrastructure,
    Aesthetics,
    Environment,
}

impl KeywordTopic {
    pub const ALL: [KeywordTopic; 8] = [
        KeywordTopic::Parking,
        KeywordTopic::Traffic,
        KeywordTopic::Affordability,
        KeywordTopic::Crime,
        KeywordTopic::Schools,
        KeywordTopic::Infrastructure,
        KeywordTopic::Aesthetics,
        KeywordTopic::Environment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KeywordTopic::Parking => "parking",
            KeywordTopic::Traffic => "traffic",
            KeywordTopic::Affordability => "affordability",
            KeywordTopic::Crime => "crime",
            KeywordTopic::Schools => "schools",
            KeywordTopic::Infrastructure => "infrastructure",
            KeywordTopic::Aesthetics => "aesthetics",
            KeywordTopic::Environment => "environment",
        }
    }

    fn pattern(self) -> &'static str {
        match self {
            KeywordTopic::Parking => r"parking?",
            KeywordTopic::Traffic => r"traffic|congestion|cars?|gridlock",
            KeywordTopic::Affordability => r"affordable|affordability|income",
            KeywordTopic::Crime => r"crime|safety|police|violence|theft|assault|criminal",
            KeywordTopic::Schools => r"school|student|classroom|enrollment",
            KeywordTopic::Infrastructure => {
                r"infrastructure|sewer|water|drainage|utility|utilities|pipes?|electric|power"
            }
            KeywordTopic::Aesthetics => {
                r"aesthetic|appearance|beauty|character|historic|preserv|style|design|architecture|shadow|tall"
            }
            KeywordTopic::Environment => {
                r"environment|wildlife|animal|bird|tree|pollution|toxic|habitat|greenhouse|climate|hazard"
            }
        }
    }
}

static KEYWORD_RES: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    KeywordTopic::ALL
        .iter()
        .map(|topic| {
            // Each family is case-insensitive and bounded by word boundaries.
            RegexBuilder::new(&format!(r"\b(?:{})\b", topic.pattern()))
                .case_insensitive(true)
                .build()
                .unwrap()
        })
        .collect()
});

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeywordError {
    #[error("keyword rate over empty text is undefined")]
    EmptyText,
}

/// `1000 * matches / whitespace-token word count` for the given family.
pub fn keyword_rate(text: &str, topic: KeywordTopic) -> Result<f64, KeywordError> {
    let words = text.split_whitespace().count();
    if words == 0 {
        return Err(KeywordError::EmptyText);
    }
    let idx = KeywordTopic::ALL.iter().position(|t| *t == topic).unwrap();
    let matches = KEYWORD_RES[idx].find_iter(text).count();
    Ok(1000.0 * matches as f64 / words as f64)
}
