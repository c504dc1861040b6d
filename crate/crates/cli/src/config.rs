//! Run settings: flat `key = value` config file, overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use epiforecast::arima::ArimaOrder;
use epiforecast::series::Transform;

use crate::error::{CliError, Result};

pub const DEFAULT_HORIZON: usize = 10;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_SEED: u64 = 1;

const KEYS: [&str; 10] = ["horizon", "minsplit", "folds", "seed", "out", "offline", "transform", "max_p", "max_q", "order"];

/// Parsed config file. Unknown keys are rejected so typos surface early.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("line {}: unknown key `{key}`", i + 1)));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("cannot parse `{v}` for `{key}`"))),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// `log1p`, `none`, or `boxcox:<lambda>`.
pub fn parse_transform(s: &str) -> Result<Transform> {
    match s.trim() {
        "log1p" | "log" => Ok(Transform::Log1p),
        "none" => Ok(Transform::None),
        other => {
            let lambda = other
                .strip_prefix("boxcox:")
                .and_then(|l| l.parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("unknown transform `{other}`")))?;
            Ok(Transform::BoxCox { lambda })
        }
    }
}

/// `p,d,q`.
pub fn parse_order(s: &str) -> Result<ArimaOrder> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Config(format!("order `{s}` must be `p,d,q`")))?;
    match parts[..] {
        [p, d, q] => Ok(ArimaOrder::new(p, d, q)?),
        _ => Err(CliError::Config(format!("order `{s}` must be `p,d,q`"))),
    }
}

/// Flags that may also come from the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub horizon: Option<usize>,
    pub minsplit: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub offline: bool,
    pub transform: Option<String>,
    pub max_p: Option<usize>,
    pub max_q: Option<usize>,
    pub order: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub horizon: usize,
    /// `None` means the row-count rule.
    pub minsplit: Option<usize>,
    pub folds: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub offline: bool,
    pub transform: Transform,
    pub max_p: usize,
    pub max_q: usize,
    pub order: Option<ArimaOrder>,
}

impl RunConfig {
    pub fn resolve(flags: &Overrides, file: &ConfigFile) -> Result<Self> {
        let transform = match flags.transform.as_deref().or(file.raw("transform")) {
            Some(t) => parse_transform(t)?,
            None => Transform::Log1p,
        };
        let order = match flags.order.as_deref().or(file.raw("order")) {
            Some(o) => Some(parse_order(o)?),
            None => None,
        };
        let cfg = Self {
            horizon: flags.horizon.or(file.get("horizon")?).unwrap_or(DEFAULT_HORIZON),
            minsplit: flags.minsplit.or(file.get("minsplit")?),
            folds: flags.folds.or(file.get("folds")?).unwrap_or(DEFAULT_FOLDS),
            seed: flags.seed.or(file.get("seed")?).unwrap_or(DEFAULT_SEED),
            out: flags.out.clone().or(file.get("out")?).unwrap_or_else(|| PathBuf::from("out")),
            offline: flags.offline || file.get("offline")?.unwrap_or(false),
            transform,
            max_p: flags.max_p.or(file.get("max_p")?).unwrap_or(epiforecast::arima::MAX_P),
            max_q: flags.max_q.or(file.get("max_q")?).unwrap_or(epiforecast::arima::MAX_Q),
            order,
        };
        if cfg.horizon == 0 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        Ok(cfg)
    }
}
