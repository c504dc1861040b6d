//! Bundled snapshots and the optional network fetch.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use epiforecast::series::TimeSeries;

use crate::error::{CliError, Result};

pub struct Bundled {
    pub name: &'static str,
    /// Location name in the remote source.
    pub location: &'static str,
    pub start: &'static str,
    pub csv: &'static str,
}

pub const END_DATE: &str = "2020-04-04";
pub const DEFAULT_URL: &str = "https://covid.ourworldindata.org/data/owid-covid-data.csv";

pub const SERIES: [Bundled; 5] = [
    Bundled { name: "india", location: "India", start: "2020-02-01", csv: include_str!("../data/india.csv") },
    Bundled { name: "uk", location: "United Kingdom", start: "2020-01-31", csv: include_str!("../data/uk.csv") },
    Bundled { name: "canada", location: "Canada", start: "2020-01-26", csv: include_str!("../data/canada.csv") },
    Bundled { name: "france", location: "France", start: "2020-01-25", csv: include_str!("../data/france.csv") },
    Bundled {
        name: "south_korea",
        location: "South Korea",
        start: "2020-01-20",
        csv: include_str!("../data/south_korea.csv"),
    },
];

pub const CFR_NAME: &str = "cfr";
pub const CFR_CSV: &str = include_str!("../data/cfr.csv");

pub fn available() -> Vec<String> {
    SERIES.iter().map(|s| s.name.to_string()).chain([CFR_NAME.to_string()]).collect()
}

/// Snapshot text for a bundled name.
pub fn bundled(name: &str) -> Result<&'static str> {
    if name == CFR_NAME {
        return Ok(CFR_CSV);
    }
    SERIES
        .iter()
        .find(|s| s.name == name)
        .map(|s| s.csv)
        .ok_or_else(|| CliError::UnknownDataset { name: name.to_string(), available: available() })
}

/// Extracts one location's daily new cases over `[start, END_DATE]` from a
/// long-format CSV with `location`, `date` and `new_cases` columns. Missing
/// counts are read as 0.
pub fn extract_location(payload: &str, location: &str, start: &str) -> Result<TimeSeries> {
    let parse_date =
        |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| CliError::Payload(format!("bad date `{s}`: {e}")));
    let (start, end) = (parse_date(start)?, parse_date(END_DATE)?);
    let mut rdr = csv::Reader::from_reader(payload.as_bytes());
    let headers = rdr.headers().map_err(|e| CliError::Payload(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Payload(format!("missing column `{name}`")))
    };
    let (loc_i, date_i, cases_i) = (col("location")?, col("date")?, col("new_cases")?);
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Payload(e.to_string()))?;
        if rec.get(loc_i) != Some(location) {
            continue;
        }
        let date = parse_date(rec.get(date_i).unwrap_or(""))?;
        if date < start || date > end {
            continue;
        }
        let raw = rec.get(cases_i).unwrap_or("").trim();
        let v = if raw.is_empty() {
            0.0
        } else {
            raw.parse::<f64>().map_err(|_| CliError::Payload(format!("bad case count `{raw}` on {date}")))?
        };
        dates.push(date);
        values.push(v.max(0.0));
    }
    if dates.is_empty() {
        return Err(CliError::Payload(format!("no rows for `{location}` between {start} and {end}")));
    }
    Ok(TimeSeries::new(dates, values)?)
}

#[cfg(feature = "network")]
fn download(url: &str) -> Result<String> {
    let mut resp = ureq::get(url).call().map_err(|e| CliError::Unreachable(format!("{url}: {e}")))?;
    resp.body_mut()
        .with_config()
        .limit(512 * 1024 * 1024)
        .read_to_string()
        .map_err(|e| CliError::Unreachable(format!("{url}: {e}")))
}

#[cfg(not(feature = "network"))]
fn download(url: &str) -> Result<String> {
    Err(CliError::Unreachable(format!("{url}: built without network support, use --offline")))
}

/// Writes `<name>.csv` for each requested name (all bundled names when
/// empty). Offline mode copies the bundled snapshots; otherwise country
/// series are pulled from `url`.
pub fn run(names: &[String], url: Option<&str>, offline: bool, out: &Path) -> Result<Vec<PathBuf>> {
    let names: Vec<String> = if names.is_empty() { available() } else { names.to_vec() };
    for n in &names {
        bundled(n)?;
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let payload = if offline || names.iter().all(|n| n == CFR_NAME) {
        None
    } else {
        Some(download(url.unwrap_or(DEFAULT_URL))?)
    };
    let mut written = Vec::new();
    for name in &names {
        let path = out.join(format!("{name}.csv"));
        let text = match (&payload, SERIES.iter().find(|s| s.name == name)) {
            (Some(p), Some(s)) => {
                let series = extract_location(p, s.location, s.start)?;
                let mut buf = Vec::new();
                series.write_csv(&mut buf)?;
                String::from_utf8(buf).expect("csv output is utf-8")
            }
            _ => bundled(name)?.to_string(),
        };
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
