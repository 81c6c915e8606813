//! Report model and the three output formats.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::OutputFormat;

/// Significant digits kept in every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub inputs: Value,
    pub results: Value,
    pub diagnostics: Value,
}

pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every float in place; integers are left alone.
pub fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *value = serde_json::Number::from_f64(round_significant(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    let mut value = serde_json::to_value(v).unwrap_or(Value::Null);
    round_value(&mut value);
    value
}

/// Dotted-path flattening; arrays use their index as a path segment.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", value, &mut out);
    out
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten_into(&join(k), v, out)),
        Value::Array(items) if !items.is_empty() => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten_into(&join(&i.to_string()), v, out)),
        Value::Array(_) => out.push((prefix.to_string(), String::new())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Writes flattened rows under the union of their keys, in first-seen order.
pub fn csv_rows(rows: &[Vec<(String, String)>]) -> String {
    let mut header: Vec<&str> = Vec::new();
    for row in rows {
        for (k, _) in row {
            if !header.contains(&k.as_str()) {
                header.push(k);
            }
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let _ = writer.write_record(&header);
    for row in rows {
        let record: Vec<&str> = header
            .iter()
            .map(|h| row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str()))
            .collect();
        let _ = writer.write_record(&record);
    }
    String::from_utf8(writer.into_inner().unwrap_or_default()).unwrap_or_default()
}

/// Left-aligned columns separated by two spaces.
pub fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    out += &line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for row in rows {
        out += &line(row);
    }
    out
}

impl Report {
    pub fn new(scenario: &str, inputs: Value, results: Value, diagnostics: Value) -> Self {
        let mut report = Self {
            scenario: scenario.to_string(),
            inputs,
            results,
            diagnostics,
        };
        round_value(&mut report.inputs);
        round_value(&mut report.results);
        round_value(&mut report.diagnostics);
        report
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.json(),
            OutputFormat::Csv => self.csv(),
            OutputFormat::Table => self.table(),
        }
    }

    pub fn json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).unwrap_or_default();
        text.push('\n');
        text
    }

    /// Sweeps emit one CSV row per point; everything else is a single row.
    pub fn csv(&self) -> String {
        match self.results.get("rows").and_then(Value::as_array) {
            Some(rows) => csv_rows(&rows.iter().map(flatten).collect::<Vec<_>>()),
            None => {
                let mut whole = Map::new();
                whole.insert("scenario".into(), Value::String(self.scenario.clone()));
                whole.insert("inputs".into(), self.inputs.clone());
                whole.insert("results".into(), self.results.clone());
                whole.insert("diagnostics".into(), self.diagnostics.clone());
                csv_rows(&[flatten(&Value::Object(whole))])
            }
        }
    }

    pub fn table(&self) -> String {
        if let Some(checks) = self.results.get("checks").and_then(Value::as_array) {
            return self.check_table(checks);
        }
        if let Some(rows) = self.results.get("rows").and_then(Value::as_array) {
            return self.sweep_table(rows);
        }
        let mut out = format!("scenario  {}\n", self.scenario);
        for (section, value) in [
            ("inputs", &self.inputs),
            ("results", &self.results),
            ("diagnostics", &self.diagnostics),
        ] {
            let entries = flatten(value);
            if entries.is_empty() || entries.iter().all(|(_, v)| v.is_empty()) {
                continue;
            }
            out += &format!("\n[{section}]\n");
            let width = entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in entries.iter().filter(|(_, v)| !v.is_empty()) {
                out += &format!("{k:<width$}  {v}\n");
            }
        }
        out
    }

    fn check_table(&self, checks: &[Value]) -> String {
        let field = |c: &Value, k: &str| match c.get(k) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Null) | None => "-".into(),
            Some(Value::Bool(b)) => if *b { "PASS" } else { "FAIL" }.into(),
            Some(v) => v.to_string(),
        };
        let header: Vec<String> = [
            "status",
            "check",
            "reference",
            "expected",
            "measured",
            "discrepancy",
            "tolerance",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<String>> = checks
            .iter()
            .map(|c| {
                vec![
                    field(c, "pass"),
                    field(c, "name"),
                    field(c, "reference"),
                    field(c, "expected"),
                    field(c, "measured"),
                    field(c, "discrepancy"),
                    field(c, "tolerance"),
                ]
            })
            .collect();
        let mut out = aligned(&header, &rows);
        for c in checks {
            if let Some(Value::String(note)) = c.get("note") {
                if !note.is_empty() {
                    out += &format!("note [{}]: {note}\n", field(c, "name"));
                }
            }
        }
        let passed = checks
            .iter()
            .filter(|c| c.get("pass") == Some(&Value::Bool(true)))
            .count();
        out += &format!("{passed}/{} checks passed\n", checks.len());
        out
    }

    fn sweep_table(&self, rows: &[Value]) -> String {
        let columns: Vec<String> = self
            .diagnostics
            .get("columns")
            .and_then(Value::as_array)
            .map(|c| c.iter().filter_map(Value::as_str).map(str::to_string).collect())
            .unwrap_or_default();
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|row| {
                let flat = flatten(row);
                columns
                    .iter()
                    .map(|c| {
                        flat.iter()
                            .find(|(k, _)| k == c)
                            .map_or(String::new(), |(_, v)| v.clone())
                    })
                    .collect()
            })
            .collect();
        aligned(&columns, &body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        assert_eq!(round_significant(2.0 / 3.0), 0.666666666667);
        assert_eq!(round_significant(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_significant(0.0), 0.0);
        let mut v = json!({"x": [0.1 + 0.2, 7], "n": 3});
        round_value(&mut v);
        assert_eq!(v, json!({"x": [0.3, 7], "n": 3}));
    }

    #[test]
    fn flattening() {
        let flat = flatten(&json!({"a": {"b": 1, "c": [true, null]}, "d": "x,y"}));
        let keys: Vec<&str> = flat.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["a.b", "a.c.0", "a.c.1", "d"]);
        let csv = csv_rows(&[flat]);
        assert_eq!(csv, "a.b,a.c.0,a.c.1,d\n1,true,,\"x,y\"\n");
    }

    #[test]
    fn csv_union_of_keys() {
        let rows = vec![
            vec![("x".to_string(), "1".to_string())],
            vec![("y".to_string(), "2".to_string()), ("x".to_string(), "3".to_string())],
        ];
        assert_eq!(csv_rows(&rows), "x,y\n1,\n3,2\n");
    }

    #[test]
    fn table_lists_sections() {
        let r = Report::new("interval", json!({"a": 1.0}), json!({"force": 0.5}), json!({}));
        let t = r.table();
        assert!(t.contains("[inputs]") && t.contains("force  0.5"));
        assert!(!t.contains("[diagnostics]"));
    }

    proptest! {
        #[test]
        fn rounding_is_idempotent(x in -1e300f64..1e300) {
            let r = round_significant(x);
            prop_assert_eq!(round_significant(r), r);
            prop_assert!((r - x).abs() <= 1e-11 * x.abs());
        }
    }
}
