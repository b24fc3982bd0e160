//! File output: provenance headers, fixed real formatting, atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifies the inputs behind an output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub command: String,
    pub digest: String,
}

impl Provenance {
    /// Digest over the canonical configuration plus command-specific
    /// settings, given as ordered `key = value` pairs.
    pub fn new(command: &str, canonical: &str, extra: &[(&str, String)]) -> Self {
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        h.update(format!("[command]\nname = {command}\n").as_bytes());
        for (k, v) in extra {
            h.update(format!("{k} = {v}\n").as_bytes());
        }
        let digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Provenance { command: command.to_string(), digest }
    }

    pub fn comment_header(&self) -> String {
        format!("# cetlab {VERSION} {}\n# config-sha256 {}\n", self.command, self.digest)
    }

    pub fn meta(&self) -> Value {
        json!({ "tool": "cetlab", "version": VERSION, "command": self.command, "config_sha256": self.digest })
    }
}

/// 17 significant digits, '.' decimal, scientific notation.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        String::from("nan")
    } else if x.is_infinite() {
        String::from(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number, or the strings "inf", "-inf", "nan" for values JSON cannot
/// carry.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(fmt_real(x))
    }
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| real(*x)).collect())
}

/// Builds an object with `meta` first, then `fields` in order.
pub fn document(prov: &Provenance, fields: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    m.insert(String::from("meta"), prov.meta());
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn csv_text(prov: &Provenance, columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).expect("in-memory write");
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        w.write_record(row.iter().map(|x| fmt_real(*x))).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output");
    prov.comment_header() + &body
}

pub fn write_csv(
    path: &Path,
    prov: &Provenance,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> std::io::Result<()> {
    write_atomic(path, csv_text(prov, columns, rows).as_bytes())
}

pub fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    write_atomic(path, json_text(value).as_bytes())
}
