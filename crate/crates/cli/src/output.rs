//! Report rendering for each `--format` choice.
//!
//! Reports are `serde_json::Value` trees. Object keys come out sorted
//! because serde_json's map is ordered, and numbers use the shortest
//! representation that round-trips.

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Renders a report. A report with a top-level `rows` array of objects is
/// tabular; anything else is flattened into `key,value` pairs.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("JSON values always serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let (header, rows) = tabulate(report);
            let mut out = String::new();
            push_csv_line(&mut out, &header);
            for row in rows {
                push_csv_line(&mut out, &row);
            }
            out
        }
        Format::Table => {
            let (header, rows) = tabulate(report);
            aligned(&header, &rows)
        }
    }
}

fn tabulate(report: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    if let Some(rows) = report.get("rows").and_then(Value::as_array) {
        if !rows.is_empty() && rows.iter().all(Value::is_object) {
            let mut header: Vec<String> = Vec::new();
            for r in rows {
                for k in r.as_object().unwrap().keys() {
                    if !header.contains(k) {
                        header.push(k.clone());
                    }
                }
            }
            let body = rows
                .iter()
                .map(|r| header.iter().map(|k| r.get(k).map(scalar_text).unwrap_or_default()).collect())
                .collect();
            return (header, body);
        }
    }
    let mut pairs = Vec::new();
    flatten("", report, &mut pairs);
    let body = pairs.into_iter().map(|(k, v)| vec![k, v]).collect();
    (vec!["key".into(), "value".into()], body)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(items) if !items.is_empty() && items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        _ => out.push((if prefix.is_empty() { "value".into() } else { prefix.into() }, scalar_text(v))),
    }
}

/// Text of a leaf value; arrays of scalars are joined with spaces.
fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(" "),
        Value::Object(_) => serde_json::to_string(v).unwrap(),
        other => other.to_string(),
    }
}

fn push_csv_line(out: &mut String, fields: &[String]) {
    let escaped: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    out.push_str(&escaped.join(","));
    out.push('\n');
}

fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:<w$}", w = width[i])).collect();
        let mut s = parts.join("  ").trim_end().to_string();
        s.push('\n');
        s
    };
    let mut out = line(header);
    out.push_str(&line(&width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>()));
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

/// True when some string in the report reads `undetermined`.
pub fn has_undetermined(v: &Value) -> bool {
    match v {
        Value::String(s) => s == "undetermined",
        Value::Array(items) => items.iter().any(has_undetermined),
        Value::Object(map) => map.values().any(has_undetermined),
        _ => false,
    }
}

/// Builds an object from key/value pairs.
pub fn object<const N: usize>(pairs: [(&str, Value); N]) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_shortest() {
        let v = json!({"b": 0.1, "a": 1.0 / 3.0});
        let s = render(&v, Format::Json);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("0.3333333333333333"));
        assert!(s.contains("0.1"));
    }

    #[test]
    fn rows_become_csv() {
        let v = json!({"rows": [{"x": 1, "y": "a,b"}, {"x": 2.5}]});
        assert_eq!(render(&v, Format::Csv), "x,y\n1,\"a,b\"\n2.5,\n");
    }

    #[test]
    fn nested_objects_flatten() {
        let v = json!({"a": {"b": [1, 2]}, "c": null});
        assert_eq!(render(&v, Format::Csv), "key,value\na.b,1 2\nc,\n");
        let t = render(&v, Format::Table);
        assert!(t.starts_with("key  value\n"));
    }

    #[test]
    fn undetermined_detection() {
        assert!(has_undetermined(&json!({"x": [{"status": "undetermined"}]})));
        assert!(!has_undetermined(&json!({"status": "converged"})));
    }
}
