//! JSON config files.
//!
//! Every file carries a top-level `"schema": 1`. Values can be overridden
//! from the command line with dotted `key=value` assignments such as
//! `landscape.noise_amplitude=0.1` or `population.0.count=80`; the value is
//! parsed as JSON when possible and taken as a bare string otherwise.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Result, SimError};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema: u64,
    #[serde(flatten)]
    inner: &'a T,
}

/// Pretty JSON with the schema tag, newline terminated.
pub fn to_versioned_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned {
        schema: SCHEMA_VERSION,
        inner: value,
    })
    .map_err(|e| SimError::config(format!("cannot serialize config: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parses a versioned document, applying `overrides` before deserializing.
pub fn parse_versioned<T: DeserializeOwned>(text: &str, overrides: &[String]) -> Result<T> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| SimError::config(format!("invalid JSON: {e}")))?;
    from_value(value, overrides)
}

pub fn from_value<T: DeserializeOwned>(mut value: Value, overrides: &[String]) -> Result<T> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| SimError::config("config must be a JSON object"))?;
    match obj.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(SimError::config(format!(
                "unsupported schema {other}, expected {SCHEMA_VERSION}"
            )))
        }
        None => return Err(SimError::config("missing `schema` field")),
    }
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    serde_json::from_value(value).map_err(|e| SimError::config(e.to_string()))
}

/// Starts from `default`, then applies overrides. Used when no file is given.
pub fn from_default<T: Serialize + DeserializeOwned>(
    default: &T,
    overrides: &[String],
) -> Result<T> {
    let mut value = serde_json::to_value(default).map_err(|e| SimError::config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    serde_json::from_value(value).map_err(|e| SimError::config(e.to_string()))
}

pub fn load<T: DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_versioned(&text, overrides)
        .map_err(|e| SimError::config(format!("{}: {e}", path.display())))
}

/// Applies one `dotted.path=value` assignment.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| SimError::config(format!("override `{assignment}` is not key=value")))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(SimError::config(format!(
            "override `{assignment}` has an empty key"
        )));
    }
    let new: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));

    let segments: Vec<&str> = path.split('.').collect();
    let (last, parents) = segments
        .split_last()
        .expect("split yields at least one segment");
    let mut cur = root;
    for seg in parents {
        cur = match cur {
            Value::Object(map) => map
                .entry(seg.to_string())
                .or_insert_with(|| Value::Object(Map::new())),
            Value::Array(items) => {
                let i = index(seg, items.len(), path)?;
                &mut items[i]
            }
            _ => {
                return Err(SimError::config(format!(
                    "`{path}`: `{seg}` is not a container"
                )))
            }
        };
    }
    match cur {
        Value::Object(map) => {
            map.insert(last.to_string(), new);
        }
        Value::Array(items) => {
            let i = index(last, items.len(), path)?;
            items[i] = new;
        }
        _ => {
            return Err(SimError::config(format!(
                "`{path}`: parent is not a container"
            )))
        }
    }
    Ok(())
}

fn index(seg: &str, len: usize, path: &str) -> Result<usize> {
    match seg.parse::<usize>() {
        Ok(i) if i < len => Ok(i),
        _ => Err(SimError::config(format!(
            "`{path}`: `{seg}` is not an index below {len}"
        ))),
    }
}
