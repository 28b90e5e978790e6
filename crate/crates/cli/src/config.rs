//! JSON run configs: defaults, an optional file merged on top, then
//! `--set key.path=value` overrides. Unknown keys are rejected by the target
//! type, so a typo anywhere surfaces as a config error naming the key.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

/// File name of the resolved config written next to every run's outputs.
pub const RESOLVED: &str = "resolved_config.json";

/// Overlays `patch` on `base`; objects merge key by key, anything else replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses `a.b.c=value`. The value is read as JSON when it parses, else as a string.
fn parse_override(s: &str) -> anyhow::Result<(Vec<String>, Value)> {
    let (key, raw) = s.split_once('=').ok_or_else(|| anyhow!("override `{s}` is not key=value"))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        bail!("override `{s}` has an empty key");
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    Ok((key.split('.').map(str::to_owned).collect(), value))
}

fn nest(path: &[String], value: Value) -> Value {
    path.iter().rev().fold(value, |v, k| {
        let mut m = Map::new();
        m.insert(k.clone(), v);
        Value::Object(m)
    })
}

/// Builds a `T` from `defaults`, an optional JSON file and overrides, in that order.
pub fn resolve<T: Serialize + DeserializeOwned>(
    defaults: &T,
    file: Option<&Path>,
    sets: &[String],
) -> Result<T, Failure> {
    let mut value = serde_json::to_value(defaults).map_err(|e| Failure::Runtime(e.into()))?;
    if let Some(path) = file {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::Config)?;
        let patch: Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(Failure::Config)?;
        if !patch.is_object() {
            return Err(Failure::Config(anyhow!("config {} must be a JSON object", path.display())));
        }
        merge(&mut value, patch);
    }
    for s in sets {
        let (path, v) = parse_override(s).map_err(Failure::Config)?;
        merge(&mut value, nest(&path, v));
    }
    serde_json::from_value(value).map_err(|e| Failure::Config(anyhow!("invalid config: {e}")))
}

/// Writes `resolved_config.json` into `dir`.
pub fn write_resolved<T: Serialize>(dir: &Path, cfg: &T) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(RESOLVED);
    let text = serde_json::to_string_pretty(cfg)?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
