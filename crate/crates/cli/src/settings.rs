//! Option layering: command-line flag, then `--config` file, then
//! `ECRSCREEN_*` environment variable, then the built-in default.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use toml::{Table, Value};

use crate::error::{io_error, CliError, CliResult};

pub const ENV_PREFIX: &str = "ECRSCREEN_";

/// Keys accepted in a settings file and as `ECRSCREEN_<KEY>` variables.
pub const KEYS: &[&str] = &[
    "response",
    "delimiter",
    "no_header",
    "method",
    "k",
    "kn",
    "ridge",
    "top_m",
    "threshold",
    "delta",
    "stop_below",
    "variance_keep",
    "seed",
    "workers",
    "replicates",
    "alpha",
    "top_k",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    Config,
    Env,
}

#[derive(Debug, Default)]
pub struct Layers {
    config: HashMap<String, String>,
    env: HashMap<String, String>,
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Integer(i) => Some(i.to_string()),
        Value::Float(f) => Some(f.to_string()),
        Value::Boolean(b) => Some(b.to_string()),
        _ => None,
    }
}

impl Layers {
    pub fn load(config: Option<&Path>) -> CliResult<Self> {
        let env = KEYS
            .iter()
            .filter_map(|k| {
                std::env::var(format!("{ENV_PREFIX}{}", k.to_uppercase()))
                    .ok()
                    .map(|v| (k.to_string(), v))
            })
            .collect();
        let config = match config {
            Some(path) => Self::read_config(path)?,
            None => HashMap::new(),
        };
        Ok(Self { config, env })
    }

    fn read_config(path: &Path) -> CliResult<HashMap<String, String>> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let table: Table = text.parse().map_err(|e| {
            CliError::Usage(format!("{}: malformed settings file: {e}", path.display()))
        })?;
        let mut bad = Vec::new();
        let mut out = HashMap::new();
        for (k, v) in &table {
            let key = k.replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                bad.push(format!("unknown key `{k}`"));
            } else if let Some(s) = scalar_text(v) {
                out.insert(key, s);
            } else {
                bad.push(format!("key `{k}` must be a string, number or boolean"));
            }
        }
        if !bad.is_empty() {
            return Err(CliError::Usage(format!(
                "{}: {}",
                path.display(),
                bad.join("; ")
            )));
        }
        Ok(out)
    }

    fn lower(&self, key: &str) -> Option<(Source, &str)> {
        self.config
            .get(key)
            .map(|v| (Source::Config, v.as_str()))
            .or_else(|| self.env.get(key).map(|v| (Source::Env, v.as_str())))
    }

    /// The value of `key` from the highest layer that sets it.
    pub fn get<T>(&self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get_with_source(key, flag)?.map(|(v, _)| v))
    }

    pub fn get_with_source<T>(&self, key: &str, flag: Option<T>) -> CliResult<Option<(T, Source)>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(Some((v, Source::Flag)));
        }
        match self.lower(key) {
            None => Ok(None),
            Some((src, text)) => {
                let origin = match src {
                    Source::Config => format!("settings key `{key}`"),
                    _ => format!("{ENV_PREFIX}{}", key.to_uppercase()),
                };
                text.parse()
                    .map(|v| Some((v, src)))
                    .map_err(|e| CliError::Usage(format!("{origin} = `{text}`: {e}")))
            }
        }
    }

    pub fn flag_set(&self, key: &str, flag: bool) -> CliResult<bool> {
        Ok(flag || self.get::<bool>(key, None)?.unwrap_or(false))
    }
}
