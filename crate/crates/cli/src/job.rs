//! JSON job files: `{"command": ..., "input": ..., "params": {...}, "output": ...}`.
//!
//! `input` is a grammar string (`drum:<drum>` for relative drums), a path to a JSON descriptor, or an inline
//! JSON descriptor. Unknown top-level fields and unknown parameters are errors.

use std::collections::BTreeMap;
use std::path::Path;

use fzeta::{Error, Result};
use serde::Deserialize;
use serde_json::Value;

use crate::commands::{Options, SpectralAction};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: String,
    #[serde(default)]
    pub input: Option<Value>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub output: Option<String>,
}

/// A job resolved into a command, its options and the output path.
pub struct Job {
    pub command: String,
    pub action: Option<SpectralAction>,
    pub options: Options,
    pub output: Option<String>,
}

fn text(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Array(items) => Ok(items.iter().map(|x| text(key, x)).collect::<Result<Vec<_>>>()?.join(",")),
        _ => Err(Error::Parse(format!("param {key:?} must be a string, number or array"))),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Parse(format!("bad descriptor: {e}")))
}

fn load(input: &Value) -> Result<Value> {
    match input {
        Value::String(s) if s.ends_with(".json") || Path::new(s).is_file() => {
            let raw = std::fs::read_to_string(s).map_err(|e| Error::Parse(format!("cannot read {s}: {e}")))?;
            serde_json::from_str(&raw).map_err(|e| Error::Parse(format!("{s}: {e}")))
        }
        other => Ok(other.clone()),
    }
}

pub fn parse(raw: &str) -> Result<Job> {
    let spec: JobSpec = serde_json::from_str(raw).map_err(|e| Error::Parse(format!("job spec: {e}")))?;
    let mut options = Options::default();
    let mut action = None;
    for (key, value) in &spec.params {
        let raw = text(key, value)?;
        let v = Some(raw.clone());
        match key.as_str() {
            "s" => options.s = v,
            "delta" => options.delta = v,
            "window" => options.window = v,
            "grid" => options.grid = v,
            "tol" => options.tol = v,
            "count" => options.count = v,
            "harmonics" => options.harmonics = v,
            "dim" => options.dim = v,
            "suite" => options.suite = v,
            "criterion" => options.criterion = v,
            "action" => {
                action = Some(
                    <SpectralAction as clap::ValueEnum>::from_str(&raw, true)
                        .map_err(|_| Error::Parse(format!("unknown spectral action {raw:?}")))?,
                );
            }
            other => return Err(Error::Parse(format!("unknown param {other:?}"))),
        }
    }
    if let Some(input) = &spec.input {
        match (spec.command.as_str(), load(input)?) {
            ("form" | "poles", Value::String(s)) => options.form = Some(s),
            ("qp", Value::String(s)) => options.set = Some(s),
            ("spectral", Value::String(s)) => options.model = Some(s),
            ("spectral", v) => options.model_json = Some(parse_json(&v)?),
            ("zeta" | "tube" | "dim" | "fit", Value::String(s)) => {
                // drums are written `drum:<drum>`; cusps are always drums
                if let Some(d) = s.strip_prefix("drum:") {
                    options.drum = Some(d.to_string());
                } else if s.starts_with("cusp:") {
                    options.drum = Some(s);
                } else {
                    options.set = Some(s);
                }
            }
            ("zeta" | "tube" | "dim" | "fit", v) => {
                // a drum carries a region; anything else is a set
                if v.get("region").is_some() {
                    options.drum_json = Some(parse_json(&v)?);
                } else {
                    options.set_json = Some(parse_json(&v)?);
                }
            }
            (cmd, _) => return Err(Error::Parse(format!("command {cmd:?} does not take this input"))),
        }
    }
    Ok(Job {
        command: spec.command,
        action,
        options,
        output: spec.output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_fields() {
        assert!(parse(r#"{"command":"zeta","input":"cantor:2,1/3","params":{"s":"0.8","delta":0.25}}"#).is_ok());
        assert!(parse(r#"{"command":"zeta","extra":1}"#).is_err());
        assert!(parse(r#"{"command":"zeta","params":{"bogus":1}}"#).is_err());
    }

    #[test]
    fn inline_descriptors() {
        let j = parse(r#"{"command":"spectral","input":{"variant":"Interval","length":1.0},"params":{"action":"zeta"}}"#)
            .unwrap();
        assert!(j.options.model_json.is_some());
        assert_eq!(j.action, Some(SpectralAction::Zeta));
        let j = parse(r#"{"command":"zeta","input":"drum:string:cantor","params":{"s":"1.5"}}"#).unwrap();
        assert_eq!(j.options.drum.as_deref(), Some("string:cantor"));
    }
}
