//! Canonical rendering of command output.
//!
//! JSON is written compactly with keys in declaration order and every float
//! in the crate's canonical 17-significant-digit scientific form, so parsing
//! a command's output and re-serializing it reproduces the bytes exactly.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use dcrv::canonical::canonical_float;
use serde_json::Value;

/// Serializes any JSON value in canonical form (compact, stable key order,
/// canonical floats).
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value);
    out
}

fn write_value(out: &mut String, value: &Value) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&canonical_float(n.as_f64().expect("finite number")));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push(':');
                write_value(out, item);
            }
            out.push('}');
        }
    }
}

/// Renders a serializable value as one canonical JSON line.
pub fn json_line<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes");
    let mut line = canonical_json(&v);
    line.push('\n');
    line
}

/// Writes the payload to the chosen sink.
pub fn emit(output: &Option<PathBuf>, payload: &str) -> io::Result<()> {
    match output {
        Some(path) => fs::write(path, payload),
        None => {
            let stdout = io::stdout();
            let mut handle = stdout.lock();
            handle.write_all(payload.as_bytes())
        }
    }
}
