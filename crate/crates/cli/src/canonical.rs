//! Platform-stable text form of artifacts: columns sorted by name, numbers
//! written with 12 significant digits. JSON is flattened to sorted
//! `key,value` rows.

use anyhow::{Context, Result};
use serde_json::Value;

/// Twelve significant digits in scientific notation; `-0` prints as `0`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if v == 0.0 {
        format!("{:.11e}", 0.0)
    } else {
        format!("{v:.11e}")
    }
}

fn cell(raw: &str) -> String {
    match raw.trim().parse::<f64>() {
        Ok(v) => format_number(v),
        Err(_) => raw.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CanonicalTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
    }

    pub fn from_csv(text: &str) -> Result<CanonicalTable> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r.records().map(|rec| Ok(rec?.iter().map(String::from).collect())).collect::<Result<_>>()?;
        Ok(CanonicalTable { header, rows })
    }
}

pub fn canonical_csv(text: &str) -> Result<CanonicalTable> {
    let raw = CanonicalTable::from_csv(text)?;
    let mut order: Vec<usize> = (0..raw.header.len()).collect();
    order.sort_by(|&a, &b| raw.header[a].cmp(&raw.header[b]));
    Ok(CanonicalTable {
        header: order.iter().map(|&i| raw.header[i].clone()).collect(),
        rows: raw.rows.iter().map(|r| order.iter().map(|&i| cell(r.get(i).map_or("", |c| c))).collect()).collect(),
    })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                // wall-clock provenance is not part of the result
                if k == "provenance" {
                    continue;
                }
                flatten(&key(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i:06}]"), x, out);
            }
        }
        Value::Number(n) => out.push((prefix.to_string(), format_number(n.as_f64().unwrap_or(f64::NAN)))),
        Value::Null => out.push((prefix.to_string(), "null".into())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::String(s) => out.push((prefix.to_string(), cell(s))),
    }
}

pub fn canonical_json(text: &str) -> Result<CanonicalTable> {
    let v: Value = serde_json::from_str(text).context("artifact is not valid JSON")?;
    let mut rows = Vec::new();
    flatten("", &v, &mut rows);
    rows.sort();
    Ok(CanonicalTable {
        header: vec!["key".into(), "value".into()],
        rows: rows.into_iter().map(|(k, v)| vec![k, v]).collect(),
    })
}

/// Canonical form of a `.json` or `.csv` artifact.
pub fn canonicalize(file_name: &str, text: &str) -> Result<CanonicalTable> {
    if file_name.ends_with(".json") {
        canonical_json(text)
    } else {
        canonical_csv(text)
    }
}
