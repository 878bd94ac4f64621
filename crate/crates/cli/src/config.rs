//! Option resolution: command-line flags override config-file keys, and the
//! fully resolved configuration is echoed into every output so a report can
//! be re-run from its own provenance block.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Merges a flat `key=value` config file with command-line flags and records
/// every resolved setting.
pub struct Resolver {
    file: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(config_path: Option<&Path>) -> Result<Resolver, CliError> {
        let mut file = BTreeMap::new();
        if let Some(path) = config_path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {path:?}: {e}")))?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "config {path:?} line {}: expected key=value, got '{line}'",
                        idx + 1
                    ))
                })?;
                file.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Resolver {
            file,
            echo: BTreeMap::new(),
        })
    }

    /// Raw lookup: flag wins over file; nothing is recorded.
    fn raw(&self, key: &str, flag: &Option<String>) -> Option<String> {
        flag.clone().or_else(|| self.file.get(key).cloned())
    }

    /// True when either source sets the key (used for exclusivity checks).
    pub fn is_set(&self, key: &str, flag: &Option<String>) -> bool {
        flag.is_some() || self.file.contains_key(key)
    }

    /// Optional string setting; recorded when present.
    pub fn optional_str(&mut self, key: &str, flag: &Option<String>) -> Option<String> {
        let value = self.raw(key, flag);
        if let Some(v) = &value {
            self.echo.insert(key.to_string(), v.clone());
        }
        value
    }

    /// Required string setting.
    pub fn required_str(&mut self, key: &str, flag: &Option<String>) -> Result<String, CliError> {
        self.optional_str(key, flag)
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }

    /// Optional typed setting; parse errors name the key.
    pub fn optional<T: FromStr>(
        &mut self,
        key: &str,
        flag: &Option<String>,
    ) -> Result<Option<T>, CliError> {
        match self.optional_str(key, flag) {
            None => Ok(None),
            Some(text) => text.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("cannot parse --{key} value '{text}'"))
            }),
        }
    }

    /// Required typed setting.
    pub fn required<T: FromStr>(
        &mut self,
        key: &str,
        flag: &Option<String>,
    ) -> Result<T, CliError> {
        self.optional(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }

    /// Typed setting with a default; the effective value is always echoed.
    pub fn with_default<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: &Option<String>,
        default: T,
    ) -> Result<T, CliError> {
        match self.raw(key, flag) {
            Some(text) => {
                let value: T = text
                    .parse()
                    .map_err(|_| CliError::Usage(format!("cannot parse --{key} value '{text}'")))?;
                self.echo.insert(key.to_string(), value.to_string());
                Ok(value)
            }
            None => {
                self.echo.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn echo_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.echo
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

/// Per-axis `lo:hi` bounds separated by commas.
pub fn parse_region(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|axis| {
            let (lo, hi) = axis
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("region axis '{axis}' must be lo:hi")))?;
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("cannot parse region bound '{lo}'")))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("cannot parse region bound '{hi}'")))?;
            Ok((lo, hi))
        })
        .collect()
}

/// Comma-separated spacing per axis; a single value replicates across axes.
pub fn parse_spacing(text: &str, d: usize) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse spacing '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if values.len() == 1 {
        Ok(vec![values[0]; d])
    } else if values.len() == d {
        Ok(values)
    } else {
        Err(CliError::Usage(format!(
            "spacing lists {} values for {} axes",
            values.len(),
            d
        )))
    }
}

/// Comma-separated increasing sample sizes.
pub fn parse_n_list(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("cannot parse sample size '{s}'")))
        })
        .collect()
}

/// `c1,c2` interval bounds.
pub fn parse_c_bounds(text: &str) -> Result<(f64, f64), CliError> {
    let (c1, c2) = text
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("cbounds '{text}' must be c1,c2")))?;
    let c1: f64 = c1
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse cbounds value '{c1}'")))?;
    let c2: f64 = c2
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse cbounds value '{c2}'")))?;
    Ok((c1, c2))
}
