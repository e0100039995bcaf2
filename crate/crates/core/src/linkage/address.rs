//! Address normalization and owner-occupancy lookup.

use std::collections::HashMap;
use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AddressError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: owner_occupied must be true/false, got `{value}`")]
    BadFlag { row: usize, value: String },
}

// Canonical forms for directional and suffix tokens. The table is fixed and
// intentionally small; vendor-specific layouts are out of scope.
const TOKEN_TABLE: &[(&str, &str)] = &[
    ("NORTH", "N"),
    ("SOUTH", "S"),
    ("EAST", "E"),
    ("WEST", "W"),
    ("NORTHEAST", "NE"),
    ("NORTHWEST", "NW"),
    ("SOUTHEAST", "SE"),
    ("SOUTHWEST", "SW"),
    ("STREET", "ST"),
    ("AVENUE", "AVE"),
    ("AV", "AVE"),
    ("BOULEVARD", "BLVD"),
    ("DRIVE", "DR"),
    ("ROAD", "RD"),
    ("LANE", "LN"),
    ("COURT", "CT"),
    ("PLACE", "PL"),
    ("CIRCLE", "CIR"),
    ("TERRACE", "TER"),
    ("PARKWAY", "PKWY"),
    ("HIGHWAY", "HWY"),
    ("TRAIL", "TRL"),
    ("SQUARE", "SQ"),
    ("APARTMENT", "APT"),
    ("SUITE", "STE"),
    ("UNIT", "UNIT"),
    ("FLOOR", "FL"),
    ("NUMBER", "#"),
    ("NO", "#"),
];

/// Uppercases, strips punctuation (keeping `#` as its own token), and
/// canonicalizes directional and suffix tokens.
pub fn normalize_address(raw: &str) -> String {
    let mut cleaned = String::with_capacity(raw.len());
    for ch in raw.chars() {
        match ch {
            '#' => cleaned.push_str(" # "),
            c if c.is_alphanumeric() => cleaned.extend(c.to_uppercase()),
            _ => cleaned.push(' '),
        }
    }
    let tokens: Vec<&str> = cleaned
        .split_whitespace()
        .map(|tok| {
            TOKEN_TABLE
                .iter()
                .find(|(long, _)| *long == tok)
                .map_or(tok, |(_, short)| *short)
        })
        .collect();
    tokens.join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ownership {
    Owner,
    NotOwner,
    Unknown,
}

/// Property table keyed by normalized address.
#[derive(Debug, Clone, Default)]
pub struct PropertyTable {
    by_address: HashMap<String, bool>,
}

impl PropertyTable {
    /// Reads `address,owner_occupied` rows, normalizing addresses on load.
    pub fn from_reader<R: io::Read>(reader: R) -> Result<Self, AddressError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut by_address = HashMap::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let address = normalize_address(record.get(0).unwrap_or(""));
            let flag = match record.get(1).unwrap_or("").trim() {
                "true" => true,
                "false" => false,
                other => {
                    return Err(AddressError::BadFlag { row: i + 2, value: other.to_string() })
                }
            };
            by_address.insert(address, flag);
        }
        Ok(PropertyTable { by_address })
    }

    pub fn len(&self) -> usize {
        self.by_address.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_address.is_empty()
    }
}

/// Exact normalized-string lookup; misses and empty addresses are unknown.
pub fn match_address(voter_address: &str, properties: &PropertyTable) -> Ownership {
    let key = normalize_address(voter_address);
    if key.is_empty() {
        return Ownership::Unknown;
    }
    match properties.by_address.get(&key) {
        Some(true) => Ownership::Owner,
        Some(false) => Ownership::NotOwner,
        None => Ownership::Unknown,
    }
}
