//! Formal-name/nickname equivalences.
//!
//! The table ships as an editable CSV (`data/nicknames.csv`, header
//! `formal,nickname`) seeded from common American nickname pairs. Lookup is
//! case-insensitive and the relation is used symmetrically.

use std::collections::HashSet;
use std::io;

use thiserror::Error;

use super::similarity::fold_name;

#[derive(Debug, Error)]
pub enum NicknameError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {0}: expected two columns `formal,nickname`")]
    BadRow(usize),
}

#[derive(Debug, Clone, Default)]
pub struct NicknameTable {
    pairs: HashSet<(String, String)>,
}

impl NicknameTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The compiled-in copy of the shipped seed table.
    pub fn builtin() -> Self {
        static CSV: &str = include_str!("../../../../data/nicknames.csv");
        Self::from_reader(CSV.as_bytes()).expect("bundled nickname table parses")
    }

    pub fn from_reader<R: io::Read>(reader: R) -> Result<Self, NicknameError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut pairs = HashSet::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(NicknameError::BadRow(i + 2));
            }
            let formal = fold_name(&record[0]);
            let nickname = fold_name(&record[1]);
            if formal.is_empty() || nickname.is_empty() {
                return Err(NicknameError::BadRow(i + 2));
            }
            pairs.insert((formal, nickname));
        }
        Ok(NicknameTable { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True iff `a` and `b` are related as formal/nickname in either
    /// direction. Inputs are folded before lookup; equal strings are not a
    /// nickname match.
    pub fn matches(&self, a: &str, b: &str) -> bool {
        let a = fold_name(a);
        let b = fold_name(b);
        if a == b {
            return false;
        }
        self.pairs.contains(&(a.clone(), b.clone())) || self.pairs.contains(&(b, a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_is_symmetric_and_case_insensitive() {
        let table = NicknameTable::builtin();
        assert!(table.len() > 100);
        assert!(table.matches("Robert", "Bob"));
        assert!(table.matches("bob", "ROBERT"));
        assert!(table.matches("Bill", "William"));
        assert!(!table.matches("Robert", "Robert"));
        assert!(!table.matches("Robert", "Bill"));
    }

    #[test]
    fn custom_table_round_trip() {
        let table = NicknameTable::from_reader("formal,nickname\nxiomara,xio\n".as_bytes()).unwrap();
        assert!(table.matches("Xiomara", "xio"));
        assert!(!table.matches("xiomara", "bob"));
    }

    #[test]
    fn bad_rows_rejected() {
        assert!(NicknameTable::from_reader("formal,nickname\nonlyone\n".as_bytes()).is_err());
        assert!(NicknameTable::from_reader("formal,nickname\n,empty\n".as_bytes()).is_err());
    }
}
