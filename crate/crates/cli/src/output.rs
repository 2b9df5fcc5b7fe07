//! Table rendering for `--pretty`.

use aleatoric::proof::ProofTrace;
use serde_json::{json, Value};

/// The trace with every intermediate formula, for display.
pub fn trace_value(trace: &ProofTrace) -> Value {
    let states = trace.replay().map(|(s, _)| s).unwrap_or_default();
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let reached = states.get(k + 1).map(ToString::to_string).unwrap_or_default();
            Value::from(format!("{s}  =>  {reached}"))
        })
        .collect();
    json!({
        "start": trace.start.to_string(),
        "end": trace.end.to_string(),
        "steps": steps,
    })
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Two columns for an object: keys on the left, values on the right.
/// Arrays are listed one element per line; nested objects are flattened
/// with dotted keys.
pub fn table(v: &Value) -> String {
    let mut rows: Vec<(String, String)> = Vec::new();
    flatten("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, rows);
            }
        }
        Value::Array(items) if !items.is_empty() && items.iter().all(|i| !i.is_object()) => {
            for (n, item) in items.iter().enumerate() {
                let key = if n == 0 { prefix.to_string() } else { String::new() };
                rows.push((key, cell(item)));
            }
        }
        other => rows.push((prefix.to_string(), cell(other))),
    }
}
