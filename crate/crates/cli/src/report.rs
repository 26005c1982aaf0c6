//! Canonical JSON and CSV output.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Fields that change between identical runs.
pub const VOLATILE: [&str; 2] = ["timestamp", "durationMs"];

/// Pretty JSON with object keys in sorted order.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("reports serialize");
    // serde_json's map is ordered by key unless `preserve_order` is enabled.
    serde_json::to_string_pretty(&sort(v)).expect("values serialize")
}

fn sort(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut items: Vec<(String, Value)> = m.into_iter().map(|(k, v)| (k, sort(v))).collect();
            items.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(items.into_iter().collect::<Map<_, _>>())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort).collect()),
        other => other,
    }
}

/// Drops the top-level [`VOLATILE`] fields.
pub fn strip_volatile(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        for k in VOLATILE {
            m.remove(k);
        }
    }
    v
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Columns of the CSV view of estimate reports.
pub const CSV_COLUMNS: [&str; 16] = [
    "source",
    "machine",
    "set",
    "input",
    "trials",
    "seed",
    "accepted",
    "rejected",
    "resourceLimit",
    "errors",
    "pointEstimate",
    "ciLow",
    "ciHigh",
    "level",
    "oracleValue",
    "pass",
];

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// One CSV row per report.
pub fn write_csv<W: Write>(reports: &[(String, Value)], sink: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_COLUMNS).map_err(CliError::other)?;
    for (source, r) in reports {
        let counts = r.get("verdictCounts");
        let count = |k: &str| cell(counts.and_then(|c| c.get(k)));
        let row = [
            source.clone(),
            cell(r.pointer("/config/machine/name")),
            cell(r.pointer("/config/machine/set")),
            cell(r.get("input")),
            cell(r.get("trials")),
            cell(r.get("seed")),
            count("accepted"),
            count("rejected"),
            count("resourceLimit"),
            count("errors"),
            cell(r.get("pointEstimate")),
            cell(r.get("ciLow")),
            cell(r.get("ciHigh")),
            cell(r.get("level")),
            cell(r.get("oracleValue")),
            cell(r.get("pass")),
        ];
        w.write_record(&row).map_err(CliError::other)?;
    }
    w.flush().map_err(CliError::other)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_come_out_sorted() {
        let s = canonical_json(&json!({"b": 1, "a": {"z": 0, "c": [ {"y": 1, "x": 2} ]}}));
        let a = s.find("\"a\"").unwrap();
        let b = s.find("\"b\"").unwrap();
        assert!(a < b);
        assert!(s.find("\"x\"").unwrap() < s.find("\"y\"").unwrap());
    }

    #[test]
    fn csv_rows() {
        let r = json!({"config": {"machine": {"name": "ulog", "set": "finite:1"}}, "trials": 10,
            "verdictCounts": {"accepted": 7, "rejected": 3}, "pass": true});
        let mut out = Vec::new();
        write_csv(&[("r.json".into(), r)], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("r.json,ulog,finite:1,,10,,7,3,"));
    }
}
