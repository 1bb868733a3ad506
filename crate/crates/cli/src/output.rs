//! Rendering of the output envelope as JSON, CSV or plain `key: value` lines.

use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub timing: Value,
    pub precision: Value,
}

/// Dotted-path leaves of a JSON value; arrays are indexed by position.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn render(format: Format, v: &Value, w: &mut impl Write) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer(&mut *w, v)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let mut cw = csv::Writer::from_writer(w);
            cw.write_record(["key", "value"])?;
            for (k, x) in rows {
                cw.write_record([k, x])?;
            }
            cw.flush()
        }
        Format::Plain => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            for (k, x) in rows {
                writeln!(w, "{k}: {x}")?;
            }
            Ok(())
        }
    }
}

pub fn emit(format: Format, env: &Envelope) -> io::Result<()> {
    let v = serde_json::to_value(env).map_err(io::Error::other)?;
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    render(format, &v, &mut lock)
}

/// Errors go to stdout as JSON in JSON mode, and to stderr otherwise.
pub fn emit_error(format: Format, command: &str, kind: &str, message: &str) {
    let v = json!({ "command": command, "error": { "kind": kind, "message": message } });
    let _ = match format {
        Format::Json => render(format, &v, &mut io::stdout().lock()),
        _ => render(Format::Plain, &v, &mut io::stderr().lock()),
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_nests_and_indexes() {
        let v = json!({ "a": { "b": "1/2" }, "c": [true, null] });
        let mut rows = Vec::new();
        flatten("", &v, &mut rows);
        assert_eq!(
            rows,
            vec![
                ("a.b".to_string(), "1/2".to_string()),
                ("c.0".to_string(), "true".to_string()),
                ("c.1".to_string(), String::new()),
            ]
        );
    }

    #[test]
    fn csv_quotes_commas() {
        let mut buf = Vec::new();
        render(Format::Csv, &json!({ "x": "a,b" }), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "key,value\nx,\"a,b\"\n");
    }
}
