//! Run configuration, versioned CSV tables and run manifests.
//!
//! Configuration is layered: built-in defaults, then a TOML file, then
//! individual `key = value` overrides (the command-line flags). Every layer
//! is checked key by key so errors can name the offending key.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clock_exact::ExactThermo;
use crate::clock_mc::{CorrelationPoint, ObservableSeries, Proposal, Start, RNG_ID};
use crate::error::{Error, Result};
use crate::scan::{grid, FidelityCurve};
use crate::{beta_from_temperature, Caps};

pub const DEFAULT_DELTA_BETA: f64 = 0.002;

const TOP_KEYS: &[&str] = &[
    "d",
    "L",
    "T",
    "beta",
    "delta_beta",
    "sweeps",
    "therm",
    "measure_every",
    "seed",
    "rng",
    "proposal",
    "start",
    "grid",
    "caps",
];
const GRID_KEYS: &[&str] = &["start", "stop", "step"];
const CAPS_KEYS: &[&str] = &["memory", "enum"];

fn config_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

/// Temperature grid `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        grid(self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct PartialGrid {
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

/// One configuration layer: every field is optional.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigLayer {
    pub d: Option<usize>,
    pub l: Option<Vec<usize>>,
    pub t: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub delta_beta: Option<f64>,
    pub sweeps: Option<usize>,
    pub therm: Option<usize>,
    pub measure_every: Option<usize>,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub proposal: Option<Proposal>,
    pub start: Option<Start>,
    grid: PartialGrid,
    pub cap_memory: Option<u64>,
    pub cap_enum: Option<u64>,
}

fn toml_int(key: &str, v: &toml::Value) -> Result<i64> {
    v.as_integer().ok_or_else(|| config_err(key, format!("expected an integer, found {}", v.type_str())))
}

fn toml_usize(key: &str, v: &toml::Value) -> Result<usize> {
    let i = toml_int(key, v)?;
    usize::try_from(i).map_err(|_| config_err(key, format!("expected a non-negative integer, found {i}")))
}

fn toml_u64(key: &str, v: &toml::Value) -> Result<u64> {
    let i = toml_int(key, v)?;
    u64::try_from(i).map_err(|_| config_err(key, format!("expected a non-negative integer, found {i}")))
}

fn toml_float(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(config_err(key, format!("expected a number, found {}", other.type_str()))),
    }
}

fn toml_str<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| config_err(key, format!("expected a string, found {}", v.type_str())))
}

fn toml_list<T>(key: &str, v: &toml::Value, item: impl Fn(&str, &toml::Value) -> Result<T>) -> Result<Vec<T>> {
    match v {
        toml::Value::Array(items) => items.iter().map(|x| item(key, x)).collect(),
        single => Ok(vec![item(key, single)?]),
    }
}

fn toml_table<'a>(key: &str, v: &'a toml::Value, allowed: &[&str]) -> Result<&'a toml::Table> {
    let t = v
        .as_table()
        .ok_or_else(|| config_err(key, format!("expected a table, found {}", v.type_str())))?;
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(config_err(&format!("{key}.{k}"), "unknown key"));
        }
    }
    Ok(t)
}

/// Best guess at the key a TOML syntax error belongs to: the text before
/// `=` on the offending line, or the table header.
fn key_at(text: &str, offset: usize) -> String {
    let offset = offset.min(text.len());
    let start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    let end = text[start..].find('\n').map_or(text.len(), |i| start + i);
    let line = text[start..end].trim();
    if let Some((k, _)) = line.split_once('=') {
        let k = k.trim().trim_matches('"');
        if !k.is_empty() {
            let section = text[..start]
                .lines()
                .map(str::trim)
                .rfind(|l| l.starts_with('[') && l.ends_with(']'))
                .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim());
            return match section {
                Some(sec) => format!("{sec}.{k}"),
                None => k.to_string(),
            };
        }
    }
    if line.starts_with('[') {
        return line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
    }
    "<syntax>".to_string()
}

fn parse_list<T: FromStr>(key: &str, s: &str, what: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|x| x.is_empty()) {
        return Err(config_err(key, format!("expected a comma-separated list of {what}, got '{s}'")));
    }
    items
        .iter()
        .map(|x| x.parse().map_err(|_| config_err(key, format!("expected {what}, got '{x}'"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| config_err(key, format!("expected {what}, got '{s}'")))
}

impl ConfigLayer {
    /// Parse a TOML document. Unknown keys and type mismatches are errors
    /// naming the key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let key = e.span().map_or_else(|| "<syntax>".to_string(), |s| key_at(text, s.start));
            config_err(&key, e.message().to_string())
        })?;
        let mut layer = Self::default();
        for (key, v) in &table {
            let k = key.as_str();
            match k {
                "d" => layer.d = Some(toml_usize(k, v)?),
                "L" => layer.l = Some(toml_list(k, v, toml_usize)?),
                "T" => layer.t = Some(toml_list(k, v, toml_float)?),
                "beta" => layer.beta = Some(toml_list(k, v, toml_float)?),
                "delta_beta" => layer.delta_beta = Some(toml_float(k, v)?),
                "sweeps" => layer.sweeps = Some(toml_usize(k, v)?),
                "therm" => layer.therm = Some(toml_usize(k, v)?),
                "measure_every" => layer.measure_every = Some(toml_usize(k, v)?),
                "seed" => layer.seed = Some(toml_u64(k, v)?),
                "rng" => layer.rng = Some(toml_str(k, v)?.to_string()),
                "proposal" => layer.proposal = Some(toml_str(k, v)?.parse().map_err(|e: Error| config_err(k, e.to_string()))?),
                "start" => layer.start = Some(toml_str(k, v)?.parse().map_err(|e: Error| config_err(k, e.to_string()))?),
                "grid" => {
                    let g = toml_table(k, v, GRID_KEYS)?;
                    for (gk, gv) in g {
                        let full = format!("grid.{gk}");
                        let x = Some(toml_float(&full, gv)?);
                        match gk.as_str() {
                            "start" => layer.grid.start = x,
                            "stop" => layer.grid.stop = x,
                            _ => layer.grid.step = x,
                        }
                    }
                }
                "caps" => {
                    let c = toml_table(k, v, CAPS_KEYS)?;
                    for (ck, cv) in c {
                        let full = format!("caps.{ck}");
                        let x = Some(toml_u64(&full, cv)?);
                        if ck == "memory" {
                            layer.cap_memory = x;
                        } else {
                            layer.cap_enum = x;
                        }
                    }
                }
                _ => {
                    debug_assert!(!TOP_KEYS.contains(&k));
                    return Err(config_err(k, "unknown key"));
                }
            }
        }
        Ok(layer)
    }

    /// Set one key from its textual form, as given on the command line.
    /// Lists (`L`, `T`, `beta`) are comma-separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "d" => self.d = Some(parse_one(key, value, "an integer")?),
            "L" => self.l = Some(parse_list(key, value, "integers")?),
            "T" => self.t = Some(parse_list(key, value, "numbers")?),
            "beta" => self.beta = Some(parse_list(key, value, "numbers")?),
            "delta_beta" => self.delta_beta = Some(parse_one(key, value, "a number")?),
            "sweeps" => self.sweeps = Some(parse_one(key, value, "an integer")?),
            "therm" => self.therm = Some(parse_one(key, value, "an integer")?),
            "measure_every" => self.measure_every = Some(parse_one(key, value, "an integer")?),
            "seed" => self.seed = Some(parse_one(key, value, "an unsigned 64-bit integer")?),
            "rng" => self.rng = Some(value.to_string()),
            "proposal" => self.proposal = Some(value.parse().map_err(|e: Error| config_err(key, e.to_string()))?),
            "start" => self.start = Some(value.parse().map_err(|e: Error| config_err(key, e.to_string()))?),
            "grid.start" => self.grid.start = Some(parse_one(key, value, "a number")?),
            "grid.stop" => self.grid.stop = Some(parse_one(key, value, "a number")?),
            "grid.step" => self.grid.step = Some(parse_one(key, value, "a number")?),
            "caps.memory" => self.cap_memory = Some(parse_one(key, value, "an integer")?),
            "caps.enum" => self.cap_enum = Some(parse_one(key, value, "an integer")?),
            _ => return Err(config_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Overlay `other` on top of `self`: fields set in `other` win.
    pub fn overlay(mut self, other: &ConfigLayer) -> Self {
        macro_rules! take {
            ($($f:ident).+) => {
                if other.$($f).+.is_some() {
                    self.$($f).+ = other.$($f).+.clone();
                }
            };
        }
        take!(d);
        take!(l);
        take!(t);
        take!(beta);
        take!(delta_beta);
        take!(sweeps);
        take!(therm);
        take!(measure_every);
        take!(seed);
        take!(rng);
        take!(proposal);
        take!(start);
        take!(grid.start);
        take!(grid.stop);
        take!(grid.step);
        take!(cap_memory);
        take!(cap_enum);
        self
    }

    /// Fill defaults and validate. `d` and `L` are required.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let d = self.d.ok_or_else(|| config_err("d", "required"))?;
        let l = self.l.clone().ok_or_else(|| config_err("L", "required"))?;
        if d < 2 {
            return Err(config_err("d", format!("need d >= 2, got {d}")));
        }
        if l.is_empty() || l.iter().any(|&x| x < 2) {
            return Err(config_err("L", format!("need every L >= 2, got {l:?}")));
        }
        let t = self.t.clone().unwrap_or_default();
        if let Some(bad) = t.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(config_err("T", format!("need finite T > 0, got {bad}")));
        }
        let beta = self.beta.clone().unwrap_or_default();
        if let Some(bad) = beta.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(config_err("beta", format!("need finite beta >= 0, got {bad}")));
        }
        let delta_beta = self.delta_beta.unwrap_or(DEFAULT_DELTA_BETA);
        if !(delta_beta.is_finite() && delta_beta >= 0.0) {
            return Err(config_err("delta_beta", format!("need finite delta_beta >= 0, got {delta_beta}")));
        }
        let measure_every = self.measure_every.unwrap_or(1);
        if measure_every == 0 {
            return Err(config_err("measure_every", "must be at least 1"));
        }
        let rng = self.rng.clone().unwrap_or_else(|| RNG_ID.to_string());
        if rng != RNG_ID {
            return Err(config_err("rng", format!("unsupported generator '{rng}' (available: {RNG_ID})")));
        }
        let g = self.grid;
        let grid = match (g.start, g.stop, g.step) {
            (None, None, None) => None,
            (Some(start), Some(stop), Some(step)) => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(config_err("grid.step", format!("need step > 0, got {step}")));
                }
                if !(start.is_finite() && start > 0.0 && stop.is_finite() && stop >= start) {
                    return Err(config_err("grid.stop", format!("need 0 < start <= stop, got {start}..{stop}")));
                }
                if (stop - start) / step > 1e6 {
                    return Err(config_err("grid.step", "grid has more than 10^6 points"));
                }
                Some(Grid { start, stop, step })
            }
            (start, stop, _) => {
                let missing = if start.is_none() {
                    "grid.start"
                } else if stop.is_none() {
                    "grid.stop"
                } else {
                    "grid.step"
                };
                return Err(config_err(missing, "required when any grid key is set"));
            }
        };
        let defaults = Caps::default();
        let caps = CapsConfig {
            memory: self.cap_memory.unwrap_or(defaults.memory as u64),
            enumeration: self.cap_enum.unwrap_or(defaults.enumeration as u64),
        };
        if caps.memory == 0 {
            return Err(config_err("caps.memory", "must be positive"));
        }
        if caps.enumeration == 0 {
            return Err(config_err("caps.enum", "must be positive"));
        }
        Ok(ResolvedConfig {
            d,
            l,
            t,
            beta,
            delta_beta,
            sweeps: self.sweeps.unwrap_or(20_000),
            therm: self.therm.unwrap_or(2_000),
            measure_every,
            seed: self.seed.unwrap_or(0),
            rng,
            proposal: self.proposal.unwrap_or(Proposal::Uniform),
            start: self.start.unwrap_or(Start::Cold),
            grid,
            caps,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsConfig {
    pub memory: u64,
    #[serde(rename = "enum")]
    pub enumeration: u64,
}

impl From<CapsConfig> for Caps {
    fn from(c: CapsConfig) -> Self {
        Caps {
            memory: c.memory as u128,
            enumeration: c.enumeration as u128,
        }
    }
}

/// A fully resolved configuration, as recorded in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    pub beta: Vec<f64>,
    pub delta_beta: f64,
    pub sweeps: usize,
    pub therm: usize,
    pub measure_every: usize,
    pub seed: u64,
    pub rng: String,
    pub proposal: Proposal,
    pub start: Start,
    pub grid: Option<Grid>,
    pub caps: CapsConfig,
}

impl ResolvedConfig {
    /// Parse a TOML file body on top of the defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        ConfigLayer::from_toml(text)?.resolve()
    }

    /// Temperatures requested, in priority order: explicit `T`, then the
    /// grid, then `beta` converted to temperatures.
    pub fn temperatures(&self) -> Result<Vec<f64>> {
        if !self.t.is_empty() {
            Ok(self.t.clone())
        } else if let Some(g) = self.grid {
            g.points()
        } else {
            Ok(self.beta.iter().map(|&b| crate::temperature_from_beta(b)).collect())
        }
    }

    /// Deformation strengths requested: explicit `beta`, otherwise the
    /// temperatures converted.
    pub fn betas(&self) -> Result<Vec<f64>> {
        if !self.beta.is_empty() {
            Ok(self.beta.clone())
        } else {
            Ok(self.temperatures()?.into_iter().map(beta_from_temperature).collect())
        }
    }

    pub fn caps(&self) -> Caps {
        self.caps.into()
    }
}

/// Column layouts of the CSV outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    /// Exact thermodynamics per temperature.
    Exact,
    /// Monte Carlo time series.
    Series,
    /// Fidelity susceptibility curve.
    Curve,
    /// Correlation function per temperature.
    Corr,
    /// String expectations against the exact correlation.
    Strings,
}

pub const SCHEMA_VERSION: u32 = 1;
const SCHEMA_PREFIX: &str = "# clockmap-schema: ";

impl Schema {
    pub const ALL: [Schema; 5] = [Schema::Exact, Schema::Series, Schema::Curve, Schema::Corr, Schema::Strings];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Exact => "exact",
            Schema::Series => "series",
            Schema::Curve => "curve",
            Schema::Corr => "corr",
            Schema::Strings => "strings",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Schema::Exact => &["T", "logZ", "E", "C_v"],
            Schema::Series => &["sample_index", "E", "C"],
            Schema::Curve => &["beta", "chi_F", "chi_F_err", "cv_route", "cv_err", "valid"],
            Schema::Corr => &["T", "r", "C", "C_err"],
            Schema::Strings => &["beta", "k", "l", "path", "string", "correlation"],
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// Round-trip float formatting: parsing the text gives back the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// A CSV table tagged with its schema. Cells are kept as text.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub schema: Schema,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(schema: Schema) -> Self {
        Self { schema, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.schema.columns().len(), "row width for schema {}", self.schema.name());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SCHEMA_PREFIX}{}/{SCHEMA_VERSION}", self.schema.name());
        out.push_str(&self.schema.columns().join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse a table. Unknown schema names or versions, a wrong header and
    /// ragged rows are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let tag = lines
            .next()
            .and_then(|l| l.strip_prefix(SCHEMA_PREFIX))
            .ok_or_else(|| Error::Decode("missing schema line".into()))?;
        let (name, version) = tag
            .trim()
            .split_once('/')
            .ok_or_else(|| Error::Decode(format!("malformed schema tag '{tag}'")))?;
        let schema = Schema::from_name(name).ok_or_else(|| Error::Decode(format!("unknown schema '{name}'")))?;
        let version: u32 = version
            .parse()
            .map_err(|_| Error::Decode(format!("malformed schema version '{version}'")))?;
        if version != SCHEMA_VERSION {
            return Err(Error::Decode(format!(
                "unsupported {name} schema version {version} (reader knows {SCHEMA_VERSION})"
            )));
        }
        let header = lines.next().ok_or_else(|| Error::Decode("missing header".into()))?;
        let expected = schema.columns().join(",");
        if header != expected {
            return Err(Error::Decode(format!("header '{header}' does not match '{expected}'")));
        }
        let width = schema.columns().len();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            if cells.len() != width {
                return Err(Error::Decode(format!("row {} has {} cells, expected {width}", i + 1, cells.len())));
            }
            rows.push(cells);
        }
        Ok(Self { schema, rows })
    }

    fn expect(text: &str, schema: Schema) -> Result<Self> {
        let t = Self::parse(text)?;
        if t.schema != schema {
            return Err(Error::Decode(format!("expected schema {}, found {}", schema.name(), t.schema.name())));
        }
        Ok(t)
    }
}

fn cell<T: FromStr>(row: &[String], col: usize, schema: Schema) -> Result<T> {
    row[col]
        .parse()
        .map_err(|_| Error::Decode(format!("bad value '{}' in column {}", row[col], schema.columns()[col])))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactRow {
    pub t: f64,
    pub log_z: f64,
    pub energy: f64,
    pub heat_capacity: f64,
}

pub fn exact_table(rows: &[ExactThermo]) -> CsvTable {
    let mut t = CsvTable::new(Schema::Exact);
    for r in rows {
        t.push(vec![fmt_f64(r.t), fmt_f64(r.log_z), fmt_f64(r.mean_energy), fmt_f64(r.heat_capacity)]);
    }
    t
}

pub fn read_exact(text: &str) -> Result<Vec<ExactRow>> {
    let s = Schema::Exact;
    CsvTable::expect(text, s)?
        .rows
        .iter()
        .map(|r| {
            Ok(ExactRow {
                t: cell(r, 0, s)?,
                log_z: cell(r, 1, s)?,
                energy: cell(r, 2, s)?,
                heat_capacity: cell(r, 3, s)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub sample_index: usize,
    pub energy: f64,
    pub bond_sum: f64,
}

pub fn series_table(series: &ObservableSeries) -> CsvTable {
    let mut t = CsvTable::new(Schema::Series);
    for (i, (e, c)) in series.energy.iter().zip(&series.bond_sum).enumerate() {
        t.push(vec![i.to_string(), fmt_f64(*e), fmt_f64(*c)]);
    }
    t
}

pub fn read_series(text: &str) -> Result<Vec<SeriesRow>> {
    let s = Schema::Series;
    CsvTable::expect(text, s)?
        .rows
        .iter()
        .map(|r| {
            Ok(SeriesRow {
                sample_index: cell(r, 0, s)?,
                energy: cell(r, 1, s)?,
                bond_sum: cell(r, 2, s)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub beta: f64,
    pub chi_f: f64,
    pub chi_f_err: f64,
    pub cv_route: f64,
    pub cv_err: f64,
    pub valid: bool,
}

pub fn curve_table(curve: &FidelityCurve) -> CsvTable {
    let mut t = CsvTable::new(Schema::Curve);
    for p in &curve.points {
        t.push(vec![
            fmt_f64(p.beta),
            fmt_f64(p.chi_f),
            fmt_f64(p.chi_f_err),
            fmt_f64(p.cv_route),
            fmt_f64(p.cv_err),
            p.valid.to_string(),
        ]);
    }
    t
}

pub fn read_curve(text: &str) -> Result<Vec<CurveRow>> {
    let s = Schema::Curve;
    CsvTable::expect(text, s)?
        .rows
        .iter()
        .map(|r| {
            Ok(CurveRow {
                beta: cell(r, 0, s)?,
                chi_f: cell(r, 1, s)?,
                chi_f_err: cell(r, 2, s)?,
                cv_route: cell(r, 3, s)?,
                cv_err: cell(r, 4, s)?,
                valid: cell(r, 5, s)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrRow {
    pub t: f64,
    pub r: usize,
    pub value: f64,
    pub std_err: f64,
}

/// Append the correlation function at temperature `t` to `table`.
pub fn push_corr(table: &mut CsvTable, t: f64, points: &[CorrelationPoint]) {
    assert_eq!(table.schema, Schema::Corr);
    for p in points {
        table.push(vec![fmt_f64(t), p.r.to_string(), fmt_f64(p.value), fmt_f64(p.std_err)]);
    }
}

pub fn read_corr(text: &str) -> Result<Vec<CorrRow>> {
    let s = Schema::Corr;
    CsvTable::expect(text, s)?
        .rows
        .iter()
        .map(|r| {
            Ok(CorrRow {
                t: cell(r, 0, s)?,
                r: cell(r, 1, s)?,
                value: cell(r, 2, s)?,
                std_err: cell(r, 3, s)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StringRow {
    pub beta: f64,
    pub k: usize,
    pub l: usize,
    pub path: String,
    pub string: f64,
    pub correlation: f64,
}

pub fn push_string(table: &mut CsvTable, row: &StringRow) {
    assert_eq!(table.schema, Schema::Strings);
    assert!(!row.path.contains(','), "path label must not contain commas");
    table.push(vec![
        fmt_f64(row.beta),
        row.k.to_string(),
        row.l.to_string(),
        row.path.clone(),
        fmt_f64(row.string),
        fmt_f64(row.correlation),
    ]);
}

pub fn read_strings(text: &str) -> Result<Vec<StringRow>> {
    let s = Schema::Strings;
    CsvTable::expect(text, s)?
        .rows
        .iter()
        .map(|r| {
            Ok(StringRow {
                beta: cell(r, 0, s)?,
                k: cell(r, 1, s)?,
                l: cell(r, 2, s)?,
                path: r[3].clone(),
                string: cell(r, 4, s)?,
                correlation: cell(r, 5, s)?,
            })
        })
        .collect()
}

/// A named output payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactRecord {
    pub name: String,
    pub sha256: String,
}

/// Hash over artifact names and contents, in order. Each entry contributes
/// its name, a zero byte, its length as u64 LE, and its bytes.
pub fn payload_hash(artifacts: &[Artifact]) -> String {
    let mut h = Sha256::new();
    for a in artifacts {
        h.update(a.name.as_bytes());
        h.update([0u8]);
        h.update((a.bytes.len() as u64).to_le_bytes());
        h.update(&a.bytes);
    }
    hex::encode(h.finalize())
}

pub const MANIFEST_SCHEMA: &str = "clockmap-manifest/1";

/// Provenance for one command invocation. Replaying `command` with
/// `config` must reproduce `payload_hash`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub config: ResolvedConfig,
    pub seeds: Vec<u64>,
    pub rng: String,
    pub code_version: String,
    pub started: String,
    pub finished: String,
    pub artifacts: Vec<ArtifactRecord>,
    pub payload_hash: String,
}

impl RunManifest {
    pub fn new(command: &str, config: ResolvedConfig, seeds: Vec<u64>, artifacts: &[Artifact]) -> Self {
        Self {
            schema: MANIFEST_SCHEMA.to_string(),
            command: command.to_string(),
            rng: config.rng.clone(),
            config,
            seeds,
            code_version: crate::CODE_VERSION.to_string(),
            started: String::new(),
            finished: String::new(),
            artifacts: artifacts
                .iter()
                .map(|a| ArtifactRecord {
                    name: a.name.clone(),
                    sha256: a.sha256(),
                })
                .collect(),
            payload_hash: payload_hash(artifacts),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Decode(format!("manifest: {e}")))?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(Error::Decode(format!("unsupported manifest schema '{}'", m.schema)));
        }
        Ok(m)
    }

    /// Compare freshly produced artifacts with the recorded hashes. Returns
    /// the names whose content differs (or that are missing/extra).
    pub fn mismatches(&self, artifacts: &[Artifact]) -> Vec<String> {
        let mut out = Vec::new();
        for rec in &self.artifacts {
            match artifacts.iter().find(|a| a.name == rec.name) {
                Some(a) if a.sha256() == rec.sha256 => {}
                _ => out.push(rec.name.clone()),
            }
        }
        for a in artifacts {
            if !self.artifacts.iter().any(|r| r.name == a.name) {
                out.push(a.name.clone());
            }
        }
        out
    }
}
