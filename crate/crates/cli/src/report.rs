//! Run reports: JSON by default, flattened `key,value` CSV on request.

use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// What a command produced. `ok = false` maps to exit code 1.
pub struct Outcome {
    pub seed: Option<u64>,
    pub parameters: Value,
    pub outcome: Value,
    pub artifacts: Vec<String>,
    pub ok: bool,
}

impl Outcome {
    pub fn new(parameters: Value, outcome: impl Serialize, ok: bool) -> Result<Self> {
        Ok(Outcome {
            seed: None,
            parameters,
            outcome: serde_json::to_value(outcome)?,
            artifacts: Vec::new(),
            ok,
        })
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn artifact(mut self, path: Option<&std::path::Path>) -> Self {
        if let Some(p) = path {
            self.artifacts.push(p.display().to_string());
        }
        self
    }
}

pub fn render(command: &[String], out: &Outcome, elapsed_ms: Option<f64>) -> Value {
    let mut report = Map::new();
    report.insert("command".into(), json!(command));
    report.insert("seed".into(), json!(out.seed));
    report.insert("parameters".into(), out.parameters.clone());
    report.insert("ok".into(), json!(out.ok));
    report.insert("outcome".into(), out.outcome.clone());
    report.insert("artifacts".into(), json!(out.artifacts));
    if let Some(ms) = elapsed_ms {
        report.insert("timings".into(), json!({ "elapsed_ms": ms }));
    }
    Value::Object(report)
}

/// Leaves of `value` keyed by dotted paths; array items use their index.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match value {
            Value::Object(map) => map.iter().for_each(|(k, v)| walk(&key(k), v, out)),
            Value::Array(items) => items
                .iter()
                .enumerate()
                .for_each(|(i, v)| walk(&key(&i.to_string()), v, out)),
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            Value::Null => out.push((prefix.to_string(), String::new())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

pub fn write(report: &Value, csv: bool, sink: &mut dyn Write) -> Result<()> {
    if csv {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["key", "value"])?;
        for (k, v) in flatten(report) {
            w.write_record([k, v])?;
        }
        w.flush()?;
    } else {
        serde_json::to_writer_pretty(&mut *sink, report)?;
        writeln!(sink)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_paths() {
        let v = json!({"a": {"b": [1, {"c": "x"}]}, "d": null, "e": true});
        assert_eq!(
            flatten(&v),
            vec![
                ("a.b.0".to_string(), "1".to_string()),
                ("a.b.1.c".to_string(), "x".to_string()),
                ("d".to_string(), String::new()),
                ("e".to_string(), "true".to_string()),
            ]
        );
    }

    #[test]
    fn csv_has_header() {
        let mut buf = Vec::new();
        write(&json!({"k": 1}), true, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "key,value\nk,1\n");
    }
}
