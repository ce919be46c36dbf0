//! Run configuration: a flat key/value map that can be loaded from a preset,
//! overridden from the command line and echoed into JSON output.

use std::collections::BTreeMap;
use std::path::Path;

use super::CliError;
use crate::fermi::{BiasConvention, ReservoirSetup};
use crate::quadrature::QuadratureSpec;
use crate::sweep::Method;
use crate::transmission::{CombWeighting, TransmissionModel};

/// Every key a config file or JSON metadata block may contain.
pub const KEYS: &[&str] = &[
    "model",
    "temp",
    "bias",
    "fermi_energy",
    "convention",
    "rel_tol",
    "abs_tol",
    "tail_multiplier",
    "max_subdivisions",
    "theta_min",
    "theta_max",
    "grid_points",
    "method",
    "nd",
    "gamma",
    "delta",
    "weighting",
    "tau",
    "trials",
    "seed",
    "theta_true",
    "theta_ref",
    "bootstrap",
    "format",
    "output",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Settings gathered from presets and flags. Values are kept as given so the
/// echo reproduces the run exactly; typed access parses on demand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn usage(key: &str, value: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value '{value}' for {key}: {message}"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("unknown config key '{key}'")));
        }
        let value = value.into().trim().to_string();
        self.values.insert(key, value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// Reads `key = value` lines (`#` starts a comment) or, if the file is a
    /// JSON object, the `metadata.config` block of a previous run.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_key_values(&text)
        }
    }

    pub fn from_key_values(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            cfg.set(k, v.trim().trim_matches('"'))?;
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
        let block = doc.pointer("/metadata/config").or_else(|| doc.get("config")).unwrap_or(&doc);
        let obj = block
            .as_object()
            .ok_or_else(|| CliError::Usage("JSON config must be an object of key/value pairs".into()))?;
        let mut cfg = RunConfig::default();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            cfg.set(k, s)?;
        }
        Ok(cfg)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| usage(key, v, e)),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| CliError::Usage(format!("missing required setting --{}", key.replace('_', "-"))))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>().map_err(|e| usage(key, s, e)))
                .collect(),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.parse(key)
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, CliError> {
        self.require(key)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    /// Models, separated by `;` (each model spec itself uses commas).
    pub fn models(&self) -> Result<Vec<TransmissionModel>, CliError> {
        let raw = self.get("model").ok_or_else(|| CliError::Usage("missing required setting --model".into()))?;
        raw.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<TransmissionModel>().map_err(|e| CliError::Usage(format!("--model: {e}"))))
            .collect()
    }

    pub fn temperatures(&self) -> Result<Vec<f64>, CliError> {
        let temps = self.list::<f64>("temp")?;
        if temps.is_empty() {
            return Err(CliError::Usage("missing required setting --temp".into()));
        }
        Ok(temps)
    }

    pub fn nd_list(&self) -> Result<Vec<usize>, CliError> {
        let nds = self.list::<usize>("nd")?;
        if nds.is_empty() {
            return Err(CliError::Usage("missing required setting --nd".into()));
        }
        Ok(nds)
    }

    /// Reservoirs at temperature `temp`.
    pub fn setup_at(&self, temp: f64) -> Result<ReservoirSetup, CliError> {
        let bias = self.require::<f64>("bias")?;
        let ef = self.f64_or("fermi_energy", 0.0)?;
        let conv = self.parse::<BiasConvention>("convention")?.unwrap_or_default();
        ReservoirSetup::new(temp, ef, bias, conv).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Reservoirs for commands that take exactly one temperature.
    pub fn setup(&self) -> Result<ReservoirSetup, CliError> {
        match self.temperatures()?.as_slice() {
            [t] => self.setup_at(*t),
            _ => Err(CliError::Usage("this command takes a single --temp".into())),
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let d = QuadratureSpec::default();
        let q = QuadratureSpec {
            rel_tol: self.f64_or("rel_tol", d.rel_tol)?,
            abs_tol: self.f64_or("abs_tol", d.abs_tol)?,
            tail_multiplier: self.f64_or("tail_multiplier", d.tail_multiplier)?,
            max_subdivisions: self.usize_or("max_subdivisions", d.max_subdivisions)?,
        };
        q.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(q)
    }

    pub fn method(&self) -> Result<Method, CliError> {
        Ok(self.parse("method")?.unwrap_or_default())
    }

    pub fn weighting(&self) -> Result<CombWeighting, CliError> {
        Ok(self.parse("weighting")?.unwrap_or_default())
    }

    pub fn format(&self) -> Result<Format, CliError> {
        match self.get("format") {
            None | Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(usage("format", other, "expected csv or json")),
        }
    }
}
