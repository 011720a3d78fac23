//! Rendering of command results as JSON or CSV artifacts with an embedded
//! run manifest.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Columns and rows of a tabular result.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Csv {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }
}

/// Result of one subcommand before rendering.
pub struct Output {
    pub json: Value,
    pub csv: Option<Csv>,
    pub default_format: Format,
}

impl Output {
    pub fn json(json: Value) -> Self {
        Output {
            json,
            csv: None,
            default_format: Format::Json,
        }
    }

    pub fn table(json: Value, csv: Csv, default_format: Format) -> Self {
        Output {
            json,
            csv: Some(csv),
            default_format,
        }
    }
}

pub struct Manifest {
    pub command: String,
    pub params: Value,
    pub seeds: Vec<u64>,
}

/// Seventeen significant digits in scientific notation, valid as a JSON
/// number.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn number_text(n: &serde_json::Number) -> String {
    if n.is_f64() {
        let x = n.as_f64().expect("float number");
        format_f64(x)
    } else {
        n.to_string()
    }
}

fn string_literal(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    let pad = |k: usize| "  ".repeat(k);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number_text(n)),
        Value::String(s) => out.push_str(&string_literal(s)),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (k, x) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_json(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(out, x, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), string_literal(key));
                write_json(out, x, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON with one key per line and floats printed by [`format_f64`].
pub fn render_json(v: &Value) -> String {
    let mut out = String::new();
    write_json(&mut out, v, 0);
    out.push('\n');
    out
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => number_text(n),
        Value::String(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Value::Bool(b) => b.to_string(),
        other => {
            let text = other.to_string();
            format!("\"{}\"", text.replace('"', "\"\""))
        }
    }
}

pub fn render_csv_body(csv: &Csv) -> String {
    let mut out = csv.columns.join(",");
    out.push('\n');
    for row in &csv.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Seconds since the Unix epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn manifest_value(m: &Manifest, checksum: String) -> Value {
    let mut map = Map::new();
    map.insert("command".into(), Value::from(m.command.clone()));
    map.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    map.insert("params".into(), m.params.clone());
    map.insert("seeds".into(), Value::from(m.seeds.clone()));
    map.insert("sha256".into(), Value::from(checksum));
    map.insert("timestamp".into(), Value::from(timestamp()));
    Value::Object(map)
}

/// Renders `out` in `format`, with the manifest embedded under the key
/// `manifest` (JSON) or as `#` comment lines (CSV). The checksum covers the
/// rendered payload without the manifest.
pub fn render(out: &Output, format: Format, manifest: &Manifest) -> Result<String, String> {
    match format {
        Format::Json => {
            let payload = render_json(&out.json);
            let mut doc = match &out.json {
                Value::Object(map) => map.clone(),
                other => {
                    let mut map = Map::new();
                    map.insert("result".into(), other.clone());
                    map
                }
            };
            doc.insert("manifest".into(), manifest_value(manifest, sha256_hex(&payload)));
            Ok(render_json(&Value::Object(doc)))
        }
        Format::Csv => {
            let csv = out
                .csv
                .as_ref()
                .ok_or_else(|| format!("`{}` has no CSV form; use --format json", manifest.command))?;
            let body = render_csv_body(csv);
            let Value::Object(meta) = manifest_value(manifest, sha256_hex(&body)) else {
                unreachable!("manifest is an object")
            };
            let mut text = String::new();
            for (key, v) in &meta {
                let shown = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = writeln!(text, "# {key}: {shown}");
            }
            text.push_str(&body);
            Ok(text)
        }
    }
}

/// The artifact text with the timestamp line removed.
pub fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| {
            let t = l.trim_start();
            !t.starts_with("\"timestamp\":") && !t.starts_with("# timestamp:")
        })
        .map(|l| format!("{l}\n"))
        .collect()
}
