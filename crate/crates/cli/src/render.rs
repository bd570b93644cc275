//! Plain-text renderings for `--format table`.

use std::fmt::Write;

use bchodge::cohomology::TableEntry;
use serde_json::Value;

use crate::commands::Grid;

pub fn cohomology(grids: &[Grid], betti: &[usize], entries: &[TableEntry]) -> String {
    let mut out = String::new();
    for g in grids {
        let label = g.theory.label();
        let n = g.dims.len();
        let _ = write!(out, "{label:<10}");
        for q in 0..n {
            let _ = write!(out, "{:>6}", format!("q={q}"));
        }
        out.push('\n');
        for (p, row) in g.dims.iter().enumerate() {
            let _ = write!(out, "{:<10}", format!("p={p}"));
            for d in row {
                let _ = write!(out, "{d:>6}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    let b: Vec<String> = betti.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(out, "{:<10}{}", "deRham", b.join(" "));
    let disagreeing: Vec<String> = entries
        .iter()
        .filter(|e| !e.agree)
        .map(|e| match (e.p, e.q) {
            (Some(p), Some(q)) => format!("{} ({p},{q})", e.theory.label()),
            _ => format!("{} degree {}", e.theory.label(), e.degree),
        })
        .collect();
    if disagreeing.is_empty() {
        out.push_str("quotient and harmonic dimensions agree\n");
    } else {
        let _ = writeln!(out, "DISAGREE: {}", disagreeing.join(", "));
    }
    out
}

pub fn checks<'a>(rows: impl Iterator<Item = (&'a str, &'a str, Option<f64>, &'a str)>) -> String {
    let mut out = String::new();
    for (name, status, value, detail) in rows {
        let value = value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{name:<20} {status:<8} {value:>10}  {detail}");
    }
    out
}

/// One `path = value` line per scalar leaf, in document order.
pub fn flatten(v: &Value) -> String {
    let mut out = String::new();
    walk(v, String::new(), &mut out);
    out
}

fn walk(v: &Value, path: String, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                walk(child, p, out);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            let _ = writeln!(out, "{path} = [{}]", parts.join(", "));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                walk(child, format!("{path}[{i}]"), out);
            }
        }
        _ => {
            let _ = writeln!(out, "{path} = {}", scalar(v));
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
