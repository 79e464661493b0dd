//! csv and jsonl dataset files.
//!
//! csv: the header names the columns; `cookie_id` and `js_enabled` are
//! metadata, every other column is an attribute. Cells are typed:
//!
//! | cell               | value                     |
//! |--------------------|---------------------------|
//! | empty              | `Missing`                 |
//! | `<masked>`         | `Masked`                  |
//! | canonical integer  | `Integer`                 |
//! | `'` + rest         | `Text(rest)` (escape)     |
//! | anything else      | `Text`                    |
//!
//! The writer adds the `'` escape only where a text value would otherwise
//! read back as something else, so ordinary exports load unchanged.
//!
//! jsonl: one object per line; `_meta` holds `{cookie_id, js_enabled}`,
//! all other keys are attributes (string, integer, null for Missing,
//! `{"$masked":true}` for Masked).

use std::collections::HashSet;
use std::path::Path;

use serde_json::Value;

use super::{AttributeName, AttributeValue, Dataset, Fingerprint, Record};
use crate::error::{Error, Result};
use crate::jsonl::{self, write_atomic};

const COOKIE_COLUMN: &str = "cookie_id";
const JS_COLUMN: &str = "js_enabled";
const META_KEY: &str = "_meta";
const MASKED_CELL: &str = "<masked>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DatasetFormat {
    Csv,
    Jsonl,
}

impl DatasetFormat {
    /// Guesses from the extension; anything but `.csv` is jsonl.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Jsonl,
        }
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let text = jsonl::read_utf8(path)?;
    let records = match format {
        DatasetFormat::Csv => parse_csv(path, &text)?,
        DatasetFormat::Jsonl => parse_jsonl(path, &text)?,
    };
    Ok(Dataset::new(records, path.display().to_string()))
}

pub fn save_dataset(d: &Dataset, path: &Path, format: DatasetFormat) -> Result<()> {
    let bytes = match format {
        DatasetFormat::Csv => render_csv(d)?,
        DatasetFormat::Jsonl => render_jsonl(d).into_bytes(),
    };
    write_atomic(path, &bytes)
}

fn decode_cell(cell: &str) -> AttributeValue {
    if let Some(rest) = cell.strip_prefix('\'') {
        AttributeValue::Text(rest.to_owned())
    } else if cell.is_empty() {
        AttributeValue::Missing
    } else if cell == MASKED_CELL {
        AttributeValue::Masked
    } else if let Some(n) = canonical_integer(cell) {
        AttributeValue::Integer(n)
    } else {
        AttributeValue::Text(cell.to_owned())
    }
}

fn encode_cell(v: &AttributeValue) -> String {
    match v {
        AttributeValue::Missing => String::new(),
        AttributeValue::Masked => MASKED_CELL.to_owned(),
        AttributeValue::Integer(n) => n.to_string(),
        AttributeValue::Text(s) => {
            if s.is_empty() || s.starts_with('\'') || s == MASKED_CELL || canonical_integer(s).is_some() {
                format!("'{s}")
            } else {
                s.clone()
            }
        }
    }
}

fn canonical_integer(s: &str) -> Option<i64> {
    s.parse::<i64>().ok().filter(|n| n.to_string() == s)
}

fn parse_bool(location: impl Fn() -> String, cell: &str) -> Result<bool> {
    match cell.trim() {
        "" | "true" | "1" | "TRUE" | "True" => Ok(true),
        "false" | "0" | "FALSE" | "False" => Ok(false),
        other => Err(Error::format(
            location(),
            format!("js_enabled must be a boolean, got `{other}`"),
        )),
    }
}

fn parse_csv(path: &Path, text: &str) -> Result<Vec<Record>> {
    let loc = |line: Option<u64>| match line {
        Some(l) => format!("{}:{l}", path.display()),
        None => path.display().to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format(loc(None), e.to_string()))?
        .clone();

    let mut seen = HashSet::new();
    let mut cookie_col = None;
    let mut js_col = None;
    let mut attr_cols: Vec<(usize, AttributeName)> = Vec::new();
    for (i, name) in header.iter().enumerate() {
        if !seen.insert(name) {
            return Err(Error::format(loc(Some(1)), format!("duplicate column `{name}`")));
        }
        match name {
            COOKIE_COLUMN => cookie_col = Some(i),
            JS_COLUMN => js_col = Some(i),
            _ => {
                let attr = AttributeName::new(name)
                    .ok_or_else(|| Error::format(loc(Some(1)), format!("empty column name at position {}", i + 1)))?;
                attr_cols.push((i, attr));
            }
        }
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::format(loc(e.position().map(|p| p.line())), e.to_string()))?;
        let line = row.position().map(|p| p.line());
        if row.len() > header.len() {
            return Err(Error::format(
                loc(line),
                format!("{} cells but only {} columns", row.len(), header.len()),
            ));
        }
        let cookie_id = cookie_col
            .and_then(|i| row.get(i))
            .filter(|c| !c.is_empty())
            .map(str::to_owned);
        let js_enabled = match js_col.and_then(|i| row.get(i)) {
            Some(cell) => parse_bool(|| loc(line), cell)?,
            None => true,
        };
        let fp: Fingerprint = attr_cols
            .iter()
            .map(|(i, name)| (name.clone(), row.get(*i).map_or(AttributeValue::Missing, decode_cell)))
            .collect();
        records.push(Record::new(fp, cookie_id, js_enabled));
    }
    Ok(records)
}

fn render_csv(d: &Dataset) -> Result<Vec<u8>> {
    let universe: Vec<AttributeName> = d.attribute_universe().into_iter().collect();
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::format("csv output", e.to_string());
    let mut header = vec![COOKIE_COLUMN.to_owned(), JS_COLUMN.to_owned()];
    header.extend(universe.iter().map(|a| a.as_str().to_owned()));
    w.write_record(&header).map_err(csv_err)?;
    for r in &d.records {
        let mut row = vec![r.cookie_id.clone().unwrap_or_default(), r.js_enabled.to_string()];
        row.extend(universe.iter().map(|a| encode_cell(r.fingerprint.get(a.as_str()))));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::format("csv output", e.to_string()))
}

fn parse_jsonl(path: &Path, text: &str) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for item in jsonl::objects(path, text) {
        let (line, obj) = item?;
        let loc = || format!("{}:{line}", path.display());
        let mut cookie_id = None;
        let mut js_enabled = true;
        let mut fp = Fingerprint::new();
        for (key, value) in obj.0 {
            if key == META_KEY {
                let meta = value
                    .as_object()
                    .ok_or_else(|| Error::format(loc(), "`_meta` must be an object"))?;
                cookie_id = match meta.get(COOKIE_COLUMN) {
                    None | Some(Value::Null) => None,
                    Some(Value::String(s)) if s.is_empty() => None,
                    Some(Value::String(s)) => Some(s.clone()),
                    Some(other) => Some(other.to_string()),
                };
                js_enabled = match meta.get(JS_COLUMN) {
                    None | Some(Value::Null) => true,
                    Some(Value::Bool(b)) => *b,
                    Some(other) => parse_bool(loc, other.as_str().unwrap_or(&other.to_string()))?,
                };
                continue;
            }
            let name = AttributeName::new(key).ok_or_else(|| Error::format(loc(), "empty attribute name"))?;
            let value = AttributeValue::from_json(&value)
                .map_err(|m| Error::format(loc(), format!("attribute `{name}`: {m}")))?;
            fp.insert(name, value);
        }
        records.push(Record::new(fp, cookie_id, js_enabled));
    }
    Ok(records)
}

fn render_jsonl(d: &Dataset) -> String {
    let mut out = String::new();
    for r in &d.records {
        let mut meta = serde_json::Map::new();
        meta.insert(
            COOKIE_COLUMN.to_owned(),
            r.cookie_id.clone().map_or(Value::Null, Value::String),
        );
        meta.insert(JS_COLUMN.to_owned(), Value::Bool(r.js_enabled));
        // `_meta` sorts before any attribute starting with a letter, but the
        // line is assembled by hand so it always comes first.
        out.push_str("{\"_meta\":");
        out.push_str(&Value::Object(meta).to_string());
        for (k, v) in r.fingerprint.iter() {
            out.push(',');
            out.push_str(&Value::String(k.as_str().to_owned()).to_string());
            out.push(':');
            out.push_str(&v.to_json().to_string());
        }
        out.push_str("}\n");
    }
    out
}
