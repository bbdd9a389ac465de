use segguard_core::{Market, PriceIndex, Rational};
use serde_json::Value;

use crate::{CliError, CliResult, Format, EXIT_VALIDATION};

/// A command's result in a form every output format can be drawn from.
pub(crate) enum Doc {
    /// Flat key/value record; table and csv list one field per line.
    Record(serde_json::Map<String, Value>),
    /// Rows under a header, with a separate JSON rendering.
    Rows {
        json: Value,
        headers: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    /// Nested JSON with a hand-written table; csv lists the table rows.
    Custom {
        json: Value,
        headers: Vec<String>,
        rows: Vec<Vec<String>>,
        table: String,
    },
}

impl Doc {
    pub(crate) fn render(&self, format: Format) -> CliResult<String> {
        match (self, format) {
            (Doc::Record(map), Format::Json) => json_text(&Value::Object(map.clone())),
            (Doc::Rows { json, .. } | Doc::Custom { json, .. }, Format::Json) => json_text(json),
            (Doc::Record(map), Format::Table) => {
                let rows: Vec<Vec<String>> =
                    map.iter().map(|(k, v)| vec![k.clone(), plain(v)]).collect();
                Ok(align(&[], &rows))
            }
            (Doc::Rows { headers, rows, .. }, Format::Table) => Ok(align(headers, rows)),
            (Doc::Custom { table, .. }, Format::Table) => Ok(table.clone()),
            (Doc::Record(map), Format::Csv) => {
                let rows: Vec<Vec<String>> =
                    map.iter().map(|(k, v)| vec![k.clone(), plain(v)]).collect();
                csv_text(&["field".into(), "value".into()], &rows)
            }
            (Doc::Rows { headers, rows, .. } | Doc::Custom { headers, rows, .. }, Format::Csv) => {
                csv_text(headers, rows)
            }
        }
    }
}

fn json_text(v: &Value) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Left-aligned columns separated by two spaces.
pub(crate) fn align(headers: &[String], rows: &[Vec<String>]) -> String {
    let cols = headers
        .len()
        .max(rows.iter().map(Vec::len).max().unwrap_or(0));
    let mut width = vec![0; cols];
    for r in std::iter::once(headers).chain(rows.iter().map(Vec::as_slice)) {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |r: &[String]| {
        let mut l = String::new();
        for (i, cell) in r.iter().enumerate() {
            if i + 1 < r.len() {
                l.push_str(&format!("{cell:<w$}  ", w = width[i]));
            } else {
                l.push_str(cell);
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    if !headers.is_empty() {
        line(headers);
    }
    for r in rows {
        line(r);
    }
    out
}

/// Every field quoted, so exact rationals such as `3/10` survive spreadsheet
/// import as text.
pub(crate) fn csv_text(headers: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Always)
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::new(EXIT_VALIDATION, e.to_string());
    w.write_record(headers).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn exact(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub(crate) fn dec(r: &Rational) -> Value {
    serde_json::Number::from_f64(r.to_f64()).map_or(Value::Null, Value::Number)
}

pub(crate) fn dec_text(r: &Rational) -> String {
    plain(&dec(r))
}

pub(crate) fn price(market: &Market, k: PriceIndex) -> Value {
    exact(market.grid().value(k))
}

pub(crate) fn rationals(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(exact).collect())
}
