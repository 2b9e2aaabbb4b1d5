// SPDX-License-Identifier: Apache-2.0

use num_traits::ToPrimitive;
use qdescent::{Ideal, Int, ZQuad};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

/// Integers that fit in `i64` are JSON numbers, larger ones decimal strings.
pub fn int(v: &Int) -> Value {
    v.to_i64().map_or_else(|| Value::String(v.to_string()), Value::from)
}

pub fn ideal(i: &Ideal) -> Value {
    let (n, c, m) = i.hnf();
    json!({
        "d": int(&i.params().b),
        "n": int(n),
        "c": int(c),
        "m": int(m),
        "norm": int(i.abs_norm()),
        "text": i.to_string(),
    })
}

pub fn elem(z: &ZQuad) -> Value {
    json!({ "b1": int(&z.b1), "b2": int(&z.b2), "text": z.to_string() })
}

pub struct Envelope {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub result: Value,
    pub durations: Vec<(&'static str, f64)>,
}

impl Envelope {
    pub fn to_json(&self, timings: bool) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), self.command.into());
        out.insert("params".into(), Value::Object(self.params.clone()));
        out.insert("result".into(), self.result.clone());
        out.insert("schema_version".into(), SCHEMA_VERSION.into());
        if timings {
            let d: Map<String, Value> = self
                .durations
                .iter()
                .map(|(k, ms)| (k.to_string(), json!((ms * 1000.0).round() / 1000.0)))
                .collect();
            out.insert("durations_ms".into(), Value::Object(d));
        }
        Value::Object(out)
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if a.is_empty() => "[]".into(),
        Value::Object(o) if o.is_empty() => "{}".into(),
        other => other.to_string(),
    }
}

/// `path = value` lines for every leaf, in key order.
pub fn flatten(v: &Value, prefix: &str, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) if !o.is_empty() => {
            for (k, x) in o {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(x, &p, out);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, &format!("{prefix}[{i}]"), out);
            }
        }
        leaf => out.push((prefix.to_string(), scalar_text(leaf))),
    }
}

pub fn key_value_table(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten(v, "", &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, x)| format!("{k:<width$} = {x}\n")).collect()
}

pub const SWEEP_COLUMNS: [&str; 9] = ["-d", "h", "h_analytic", "h_forms", "h_group", "qualifies", "count", "method", "points"];

fn sweep_cell(row: &Value, col: &str) -> String {
    match col {
        "-d" => row["d"].as_i64().map_or_else(|| row["d"].to_string(), |d| (-d).to_string()),
        "points" => {
            let pts: Vec<String> = row["points"]
                .as_array()
                .into_iter()
                .flatten()
                .map(|p| format!("({},{})", scalar_text(&p[0]), scalar_text(&p[1])))
                .collect();
            if pts.is_empty() {
                "-".into()
            } else {
                pts.join(" ")
            }
        }
        c => match &row[c] {
            Value::Null => "-".into(),
            v => scalar_text(v),
        },
    }
}

/// Sweep rows as a `|`-separated table, one line per `d`.
pub fn sweep_table(rows: &[Value]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| SWEEP_COLUMNS.iter().map(|c| sweep_cell(r, c)).collect()).collect();
    let widths: Vec<usize> = SWEEP_COLUMNS
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let line = |vals: Vec<String>| {
        let parts: Vec<String> = vals.iter().zip(&widths).map(|(v, w)| format!(" {v:<w$} ")).collect();
        format!("|{}|\n", parts.join("|"))
    };
    let mut out = line(SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect());
    for r in cells {
        out += &line(r);
    }
    out
}
