//! Raw CSV frames and level recoding.
//!
//! A [`RawFrame`] holds untyped cells exactly as read from disk. Recoding
//! maps observed string levels to numeric tokens (or to missing) before the
//! frame is validated against a schema, so categorical extracts like
//! "Republican"/"Democrat" can be brought into the 0/1 coding convention.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Cell value a recode rule writes for levels mapped to missing. The default
/// missing tokens include the empty string, so downstream ingestion treats
/// these cells as missing.
pub const MISSING_CELL: &str = "";

/// Header row plus untyped data cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawFrame {
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(RawFrame { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Maps every observed level of one column to a numeric token or to missing.
#[derive(Debug, Clone, PartialEq)]
pub struct RecodeRule {
    pub column: String,
    map: BTreeMap<String, Option<String>>,
}

impl RecodeRule {
    /// Builds a rule from level -> token text, where the token is either a
    /// numeric literal or the word "missing".
    pub fn new(column: &str, map: BTreeMap<String, String>) -> Result<Self> {
        let mut parsed = BTreeMap::new();
        for (level, target) in map {
            let value = if target == "missing" {
                None
            } else {
                let v: f64 = target.parse().map_err(|_| Error::Config {
                    detail: format!(
                        "recode for column {column:?}, level {level:?}: target {target:?} \
                         is neither numeric nor \"missing\""
                    ),
                })?;
                if !v.is_finite() {
                    return Err(Error::Config {
                        detail: format!(
                            "recode for column {column:?}, level {level:?}: non-finite target"
                        ),
                    });
                }
                Some(target)
            };
            parsed.insert(level, value);
        }
        Ok(RecodeRule {
            column: column.to_string(),
            map: parsed,
        })
    }

    pub fn from_pairs(column: &str, pairs: &[(&str, Option<f64>)]) -> Result<Self> {
        let map = pairs
            .iter()
            .map(|(level, v)| {
                let target = match v {
                    Some(x) => x.to_string(),
                    None => "missing".to_string(),
                };
                (level.to_string(), target)
            })
            .collect();
        RecodeRule::new(column, map)
    }
}

/// Applies the rules and returns a new frame.
///
/// Every observed level of a recoded column must be covered by its rule;
/// an unmapped level is an error listing the level and the column.
pub fn recode(frame: &RawFrame, rules: &[RecodeRule]) -> Result<RawFrame> {
    let mut out = frame.clone();
    for rule in rules {
        let col = frame
            .column_index(&rule.column)
            .ok_or_else(|| Error::UnknownColumn {
                column: rule.column.clone(),
            })?;
        for row in &mut out.rows {
            let level = row[col].trim();
            match rule.map.get(level) {
                Some(Some(token)) => row[col] = token.clone(),
                Some(None) => row[col] = MISSING_CELL.to_string(),
                None => {
                    return Err(Error::UnmappedLevel {
                        column: rule.column.clone(),
                        level: level.to_string(),
                    })
                }
            }
        }
    }
    Ok(out)
}
