//! Human tables and CSV, both rendered from the JSON artifact.

use serde_json::{Map, Value};
use std::fmt::Write as _;

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => {
                if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
                    format!("{x:.6e}")
                } else {
                    format!("{x:.6}")
                }
            }
            _ => n.to_string(),
        },
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

/// An array of objects whose values are all scalars.
fn as_table(v: &Value) -> Option<Vec<&Map<String, Value>>> {
    let arr = v.as_array()?;
    if arr.is_empty() {
        return None;
    }
    let rows: Vec<&Map<String, Value>> = arr.iter().map(|r| r.as_object()).collect::<Option<_>>()?;
    rows.iter()
        .all(|r| r.values().all(|x| !x.is_object() && !x.is_array()))
        .then_some(rows)
}

fn columns(rows: &[&Map<String, Value>]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

fn table(out: &mut String, indent: usize, rows: &[&Map<String, Value>]) {
    let cols = columns(rows);
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| cols.iter().map(|c| r.get(c).map(scalar).unwrap_or_default()).collect())
        .collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let pad = " ".repeat(indent);
    let line = |out: &mut String, vals: &[String]| {
        let s: Vec<String> = vals.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
        let _ = writeln!(out, "{pad}{}", s.join("  "));
    };
    line(out, &cols);
    let _ = writeln!(
        out,
        "{pad}{}",
        widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")
    );
    for r in &cells {
        line(out, r);
    }
}

fn walk(out: &mut String, indent: usize, key: &str, v: &Value) {
    let pad = " ".repeat(indent);
    if let Some(rows) = as_table(v) {
        let _ = writeln!(out, "{pad}{key}:");
        table(out, indent + 2, &rows);
        return;
    }
    match v {
        Value::Object(m) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (k, x) in m {
                walk(out, indent + 2, k, x);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (i, x) in a.iter().enumerate() {
                walk(out, indent + 2, &format!("[{i}]"), x);
            }
        }
        Value::Array(a) => {
            let s: Vec<String> = a.iter().map(scalar).collect();
            let _ = writeln!(out, "{pad}{key}: [{}]", s.join(", "));
        }
        _ => {
            let _ = writeln!(out, "{pad}{key}: {}", scalar(v));
        }
    }
}

/// Indented key/value listing with arrays of flat records shown as tables.
pub fn pretty(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                walk(&mut out, 0, k, x);
            }
        }
        other => walk(&mut out, 0, "value", other),
    }
    out
}

/// CSV from an array of flat records; None when `rows` is not such an array.
pub fn csv(rows: &Value) -> Option<String> {
    let rows = as_table(rows)?;
    let cols = columns(&rows);
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(&cols).ok()?;
    for r in &rows {
        let rec: Vec<String> = cols
            .iter()
            .map(|c| match r.get(c) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Null) | None => String::new(),
                Some(x) => x.to_string(),
            })
            .collect();
        w.write_record(&rec).ok()?;
    }
    String::from_utf8(w.into_inner().ok()?).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn tables_and_csv() {
        let v = json!({ "rows": [{ "p": 3, "x": 0.5 }, { "p": 5, "x": 1e-9 }], "ok": true });
        let s = pretty(&v);
        assert!(s.contains("rows:") && s.contains("1.000000e-9") && s.contains("ok: true"));
        assert_eq!(csv(&v["rows"]).unwrap(), "p,x\n3,0.5\n5,1e-9\n");
        assert!(csv(&json!({ "a": 1 })).is_none());
    }
}
