//! Report documents and their JSON, CSV and human renderings.
//!
//! JSON and CSV share one number formatter, so a value read back from
//! either is the same `f64`.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::expr::format_number;
use crate::ineq::InequalityReport;

pub const SCHEMA: &str = "hadamard-audit/1";

pub const CSV_COLUMNS: [&str; 9] = ["theorem", "function", "a", "b", "name", "value", "abs_error", "slack", "verdict"];

/// Seventeen significant digits and a signed exponent; round-trips any
/// `f64` and is left unchanged by the JSON writer.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.16e}");
        match s.split_once('e') {
            Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
            _ => s,
        }
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub subcommand: String,
    pub config: Value,
    pub reports: Vec<InequalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

impl Document {
    pub fn new(subcommand: &str, config: Value) -> Self {
        Document { schema: SCHEMA, subcommand: subcommand.into(), config, reports: Vec::new(), summary: None }
    }
}

/// Rewrites every floating-point number in place with [`format_f64`].
/// Integers are left alone.
pub fn normalize_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().expect("is_f64 numbers convert");
            *n = format_f64(f).parse::<Number>().expect("finite float text is a JSON number");
        }
        Value::Array(items) => items.iter_mut().for_each(normalize_numbers),
        Value::Object(map) => map.values_mut().for_each(normalize_numbers),
        _ => {}
    }
}

pub fn to_json_value<T: Serialize>(x: &T) -> Value {
    let mut v = serde_json::to_value(x).expect("report types serialize");
    normalize_numbers(&mut v);
    v
}

pub fn to_json(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(doc)).expect("values serialize");
    s.push('\n');
    s
}

/// One row per chain member.
pub fn to_csv(reports: &[InequalityReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in reports {
        for side in &r.chain {
            w.write_record([
                r.theorem.tag().to_string(),
                r.function.clone(),
                format_f64(r.interval.a()),
                format_f64(r.interval.b()),
                side.name.clone(),
                format_f64(side.value),
                format_f64(side.abs_error),
                format_f64(r.slack),
                r.verdict.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn render_report(r: &InequalityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}  f(x) = {}  on {}", r.theorem, r.function, r.interval);
    for side in &r.chain {
        let _ = writeln!(s, "  {:<16} {:>24}  (err {:.1e})", side.name, format_number(side.value), side.abs_error);
    }
    if !r.aux.is_empty() {
        let aux: Vec<String> = r.aux.iter().map(|(k, v)| format!("{k} = {}", format_number(*v))).collect();
        let _ = writeln!(s, "  aux: {}", aux.join(", "));
    }
    let _ = writeln!(s, "  slack {:.6e}  tolerance {:.1e}  verdict {}", r.slack, r.tolerance_used, r.verdict);
    for note in &r.notes {
        let _ = writeln!(s, "  note: {note}");
    }
    s
}
