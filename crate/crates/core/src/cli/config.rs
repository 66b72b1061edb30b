//! Run configuration, read from TOML.
//!
//! ```toml
//! k = 3
//! statistics = ["triangles", "edges", "mean_degree"]
//! target = ["1/8", "3/2", "1"]
//! mode = "fit"                  # hull | check | fit | degeneracy | probe | all
//! seed = 7                      # probe battery RNG
//! r_schedule = [1, 2, 4, 8]     # degeneracy rays; default 1, 2, …, 2^20
//! cache_path = "cache/"         # directory of cached realizable sets
//!
//! [fit]
//! grad_tol = 1e-10
//! max_iters = 200
//! armijo_c = 1e-4
//! backtrack_factor = 0.5
//! init = [0.0, 0.0, 0.0]
//!
//! [probe]
//! samples = 100
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::graphspace::{check_vertex_count, StatisticKind, StatisticSpec, N_MAX};
use crate::likelihood::{FitConfig, Theta};
use crate::rational::{parse_rational, RationalVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Hull,
    Check,
    Fit,
    Degeneracy,
    Probe,
    #[default]
    All,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Hull,
        Mode::Check,
        Mode::Fit,
        Mode::Degeneracy,
        Mode::Probe,
        Mode::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Hull => "hull",
            Mode::Check => "check",
            Mode::Fit => "fit",
            Mode::Degeneracy => "degeneracy",
            Mode::Probe => "probe",
            Mode::All => "all",
        }
    }

    pub fn needs_target(self) -> bool {
        self != Mode::Hull
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("mode", format!("unknown mode {s:?}")))
    }
}

pub const DEFAULT_PROBE_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub k: usize,
    pub statistics: Vec<StatisticSpec>,
    pub target: Option<RationalVector>,
    pub mode: Mode,
    pub fit: FitConfig,
    pub r_schedule: Option<Vec<f64>>,
    pub cache_path: Option<PathBuf>,
    pub seed: u64,
    pub probe_samples: usize,
}

impl RunConfig {
    pub fn new(k: usize, kinds: &[StatisticKind], mode: Mode) -> Self {
        RunConfig {
            k,
            statistics: StatisticSpec::list(kinds),
            target: None,
            mode,
            fit: FitConfig::default(),
            r_schedule: None,
            cache_path: None,
            seed: 0,
            probe_samples: DEFAULT_PROBE_SAMPLES,
        }
    }

    pub fn with_target(mut self, target: RationalVector) -> Self {
        self.target = Some(target);
        self
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: Table = toml::from_str(text).map_err(|e| Error::config("", e.message()))?;
    parse_config_table(&table)
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "a string",
        Value::Integer(_) => "an integer",
        Value::Float(_) => "a float",
        Value::Boolean(_) => "a boolean",
        Value::Datetime(_) => "a datetime",
        Value::Array(_) => "an array",
        Value::Table(_) => "a table",
    }
}

fn expected(path: &str, what: &str, got: &Value) -> Error {
    Error::config(path, format!("expected {what}, found {}", kind_name(got)))
}

fn reject_unknown(table: &Table, prefix: &str, known: &[&str]) -> Result<()> {
    match table.keys().find(|k| !known.contains(&k.as_str())) {
        Some(key) => Err(Error::config(format!("{prefix}{key}"), "unknown key")),
        None => Ok(()),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| expected(path, "an array", v))
}

fn non_negative_int(v: &Value, path: &str) -> Result<u64> {
    match v.as_integer() {
        Some(i) if i >= 0 => Ok(i as u64),
        Some(_) => Err(Error::config(path, "must be nonnegative")),
        None => Err(expected(path, "an integer", v)),
    }
}

fn number(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Integer(i) => Ok(*i as f64),
        Value::Float(f) => Ok(*f),
        _ => Err(expected(path, "a number", v)),
    }
}

fn number_list(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

/// Validates an already parsed table; command-line overrides are merged into
/// the table before this runs so both paths share one set of checks.
pub fn parse_config_table(table: &Table) -> Result<RunConfig> {
    reject_unknown(
        table,
        "",
        &[
            "k",
            "statistics",
            "target",
            "mode",
            "fit",
            "r_schedule",
            "cache_path",
            "seed",
            "probe",
        ],
    )?;

    let k_value = table
        .get("k")
        .ok_or_else(|| Error::config("k", "missing"))?;
    let k = non_negative_int(k_value, "k")? as usize;
    if k < 2 {
        return Err(Error::config("k", "need at least 2 vertices"));
    }
    check_vertex_count(k)?;

    let stats_value = table
        .get("statistics")
        .ok_or_else(|| Error::config("statistics", "missing"))?;
    let mut statistics = Vec::new();
    for (i, s) in array(stats_value, "statistics")?.iter().enumerate() {
        let path = format!("statistics[{i}]");
        let name = s.as_str().ok_or_else(|| expected(&path, "a string", s))?;
        let kind = name
            .parse::<StatisticKind>()
            .map_err(|_| Error::config(&path, format!("unknown statistic kind {name:?}")))?;
        statistics.push(StatisticSpec::new(kind));
    }
    if statistics.is_empty() {
        return Err(Error::config(
            "statistics",
            "at least one statistic is required",
        ));
    }
    if statistics.len() > N_MAX {
        return Err(Error::CapacityExceeded {
            what: "statistics",
            value: statistics.len(),
            limit: N_MAX,
        });
    }

    let mode = match table.get("mode") {
        None => Mode::default(),
        Some(v) => v
            .as_str()
            .ok_or_else(|| expected("mode", "a string", v))?
            .parse()?,
    };

    let target = match table.get("target") {
        None => None,
        Some(v) => {
            let items = array(v, "target")?;
            let mut coords = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                let path = format!("target[{i}]");
                let value = match item {
                    Value::String(s) => {
                        parse_rational(s).map_err(|e| Error::config(&path, e.to_string()))?
                    }
                    Value::Integer(n) => crate::rational::int(*n),
                    other => {
                        return Err(expected(&path, "a rational string such as \"3/2\"", other))
                    }
                };
                coords.push(value);
            }
            if coords.len() != statistics.len() {
                return Err(Error::config(
                    "target",
                    format!(
                        "has {} entries but {} statistics are listed",
                        coords.len(),
                        statistics.len()
                    ),
                ));
            }
            Some(RationalVector(coords))
        }
    };
    if mode.needs_target() && target.is_none() {
        return Err(Error::config("target", format!("required by mode {mode}")));
    }

    let mut fit = FitConfig::default();
    if let Some(v) = table.get("fit") {
        let t = v.as_table().ok_or_else(|| expected("fit", "a table", v))?;
        reject_unknown(
            t,
            "fit.",
            &[
                "grad_tol",
                "max_iters",
                "armijo_c",
                "backtrack_factor",
                "init",
            ],
        )?;
        if let Some(x) = t.get("grad_tol") {
            fit.grad_tol = number(x, "fit.grad_tol")?;
        }
        if let Some(x) = t.get("max_iters") {
            fit.max_iters = non_negative_int(x, "fit.max_iters")? as usize;
        }
        if let Some(x) = t.get("armijo_c") {
            fit.armijo_c = number(x, "fit.armijo_c")?;
        }
        if let Some(x) = t.get("backtrack_factor") {
            fit.backtrack_factor = number(x, "fit.backtrack_factor")?;
        }
        if let Some(x) = t.get("init") {
            let init = number_list(x, "fit.init")?;
            if init.len() != statistics.len() {
                return Err(Error::config("fit.init", "length differs from statistics"));
            }
            fit.init = Some(Theta(init));
        }
        fit.validate()
            .map_err(|e| Error::config("fit", e.to_string()))?;
    }

    let r_schedule = match table.get("r_schedule") {
        None => None,
        Some(v) => {
            let r = number_list(v, "r_schedule")?;
            if r.is_empty() || r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::config(
                    "r_schedule",
                    "entries must be finite and nonnegative",
                ));
            }
            if r.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config("r_schedule", "must be strictly increasing"));
            }
            Some(r)
        }
    };

    let cache_path = match table.get("cache_path") {
        None => None,
        Some(v) => Some(PathBuf::from(
            v.as_str()
                .ok_or_else(|| expected("cache_path", "a string", v))?,
        )),
    };

    let seed = match table.get("seed") {
        None => 0,
        Some(v) => non_negative_int(v, "seed")?,
    };

    let mut probe_samples = DEFAULT_PROBE_SAMPLES;
    if let Some(v) = table.get("probe") {
        let t = v
            .as_table()
            .ok_or_else(|| expected("probe", "a table", v))?;
        reject_unknown(t, "probe.", &["samples"])?;
        if let Some(x) = t.get("samples") {
            probe_samples = non_negative_int(x, "probe.samples")? as usize;
        }
    }

    Ok(RunConfig {
        k,
        statistics,
        target,
        mode,
        fit,
        r_schedule,
        cache_path,
        seed,
        probe_samples,
    })
}
