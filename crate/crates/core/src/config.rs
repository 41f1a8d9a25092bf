//! JSON scenario files.
//!
//! A document is an object whose keys mirror [`Scenario`]. Every key is
//! optional; missing keys take the defaults (or those of the preset named
//! by the optional `"preset"` key). Nested objects merge key by key, so
//! `{"preset": "scenario3", "mfc": {"tau": 0.3}}` only changes `tau`.
//! Unknown keys are rejected.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::scenario::{Preset, Scenario, ScenarioError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("bad key or value: {0}")]
    Key(String),
    #[error("validation failed: {0}")]
    Validation(#[from] ScenarioError),
}

const PRESET_KEY: &str = "preset";

pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(mut overrides) = doc else {
        return Err(ConfigError::Key("top level must be a JSON object".into()));
    };

    let base = match overrides.remove(PRESET_KEY) {
        None => Scenario::default(),
        Some(Value::String(name)) => Preset::from_name(&name)
            .map(Scenario::preset)
            .ok_or_else(|| ConfigError::Key(format!("unknown preset `{name}`")))?,
        Some(other) => {
            return Err(ConfigError::Key(format!("`preset` must be a string, got {other}")))
        }
    };

    let mut merged = serde_json::to_value(&base).expect("scenario serializes");
    merge(&mut merged, Value::Object(overrides));
    let scenario: Scenario =
        serde_json::from_value(merged).map_err(|e| ConfigError::Key(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

/// Overlay `patch` onto `base`; objects merge recursively, everything else
/// replaces.
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

/// Fully resolved scenario document.
pub fn to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}

/// Reference document: the defaults plus every shipped preset.
pub fn defaults_document() -> String {
    let mut presets = Map::new();
    for p in Preset::ALL {
        presets.insert(
            p.name().to_string(),
            serde_json::to_value(Scenario::preset(p)).expect("scenario serializes"),
        );
    }
    let mut doc = Map::new();
    doc.insert(
        "default".into(),
        serde_json::to_value(Scenario::default()).expect("scenario serializes"),
    );
    doc.insert("presets".into(), Value::Object(presets));
    serde_json::to_string_pretty(&Value::Object(doc)).expect("document serializes")
}
