//! Country-level case-fatality table: CSV schema, validation and conversion
//! into a CART [`Table`].
//!
//! Columns are `x1..x10` and `y`, optionally preceded by `country`.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cart::{FeatureKind, Table};
use crate::error::{Error, Result};

pub const MAX_CFR: f64 = 0.2;

pub struct Column {
    pub key: &'static str,
    pub name: &'static str,
    pub kind: FeatureKind,
    /// Allowed codes for categorical columns.
    pub levels: &'static [i64],
}

pub const COLUMNS: [Column; 10] = [
    Column { key: "x1", name: "total_cases_k", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x2", name: "population_m", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x3", name: "density_per_km2", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x4", name: "pct_over_65", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x5", name: "lockdown_days", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x6", name: "time_period_days", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x7", name: "doctors_per_1000", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x8", name: "beds_per_1000", kind: FeatureKind::Numeric, levels: &[] },
    Column { key: "x9", name: "income_standard", kind: FeatureKind::Categorical, levels: &[0, 1] },
    Column { key: "x10", name: "climate_zone", kind: FeatureKind::Categorical, levels: &[-1, 0, 1] },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfrRecord {
    pub country: Option<String>,
    pub x: [f64; 10],
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfrDataset {
    pub records: Vec<CfrRecord>,
}

fn schema_err(line: usize, col: &str, msg: impl std::fmt::Display) -> Error {
    Error::Schema(format!("line {line}, column `{col}`: {msg}"))
}

impl CfrRecord {
    fn validate(&self, line: usize) -> Result<()> {
        for (c, &v) in COLUMNS.iter().zip(&self.x) {
            if !v.is_finite() {
                return Err(schema_err(line, c.key, "not a finite number"));
            }
            match c.kind {
                FeatureKind::Numeric if v < 0.0 => return Err(schema_err(line, c.key, format!("negative value {v}"))),
                FeatureKind::Categorical if v.fract() != 0.0 || !c.levels.contains(&(v as i64)) => {
                    return Err(schema_err(line, c.key, format!("level {v} not in {:?}", c.levels)))
                }
                _ => {}
            }
        }
        if !(0.0..=MAX_CFR).contains(&self.y) {
            return Err(schema_err(line, "y", format!("CFR {} outside [0, {MAX_CFR}]", self.y)));
        }
        Ok(())
    }
}

impl CfrDataset {
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let find = |key: &str| header.iter().position(|h| h == key);

        let missing: Vec<&str> =
            COLUMNS.iter().map(|c| c.key).chain(["y"]).filter(|k| find(k).is_none()).collect();
        let unknown: Vec<&str> = header
            .iter()
            .map(String::as_str)
            .filter(|h| *h != "country" && *h != "y" && !COLUMNS.iter().any(|c| c.key == *h))
            .collect();
        if !missing.is_empty() || !unknown.is_empty() {
            return Err(Error::Schema(format!(
                "CFR header mismatch: missing columns [{}], unexpected columns [{}]",
                missing.join(", "),
                unknown.join(", ")
            )));
        }
        let idx: Vec<usize> = COLUMNS.iter().map(|c| find(c.key).expect("checked above")).collect();
        let y_idx = find("y").expect("checked above");
        let country_idx = find("country");

        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let parse = |col: usize, key: &str| -> Result<f64> {
                let s = row.get(col).unwrap_or("");
                s.parse::<f64>().map_err(|_| schema_err(line, key, format!("cannot parse `{s}` as a number")))
            };
            let mut x = [0.0; 10];
            for (k, c) in COLUMNS.iter().enumerate() {
                x[k] = parse(idx[k], c.key)?;
            }
            let rec = CfrRecord {
                country: country_idx.and_then(|c| row.get(c)).map(str::to_string),
                x,
                y: parse(y_idx, "y")?,
            };
            rec.validate(line)?;
            records.push(rec);
        }
        if records.is_empty() {
            return Err(Error::Schema("CFR table has no data rows".into()));
        }
        Ok(Self { records })
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_table(&self) -> Result<Table> {
        Table::new(
            COLUMNS.iter().map(|c| c.name.to_string()).collect(),
            COLUMNS.iter().map(|c| c.kind).collect(),
            self.records.iter().map(|r| r.x.to_vec()).collect(),
            self.records.iter().map(|r| r.y).collect(),
        )
    }
}
