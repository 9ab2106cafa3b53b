//! Reading `(N, count)` tables for `slope` and `verify`.
//!
//! Accepted inputs: CSV with `N` and `count` columns (the `energy` CSV
//! output), a JSON array of `[N, count]` pairs or of objects with `N` and
//! `count` fields, or a full JSON report whose `results` is one of those.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::report::Failure;

pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage("Io", format!("{}: {e}", path.display())))?;
    let bad = |msg: &str| Failure::usage("InvalidTable", format!("{}: {msg}", path.display()));
    match serde_json::from_str::<Value>(&text) {
        Ok(v) => from_json(&v).ok_or_else(|| bad("expected [N, count] rows")),
        Err(_) => from_csv(&text).map_err(|m| bad(&m)),
    }
}

fn from_json(v: &Value) -> Option<Vec<(f64, f64)>> {
    match v {
        Value::Object(map) if map.contains_key("results") => from_json(&map["results"]),
        Value::Object(_) => row(v).map(|r| vec![r]),
        Value::Array(items) => items.iter().map(row).collect(),
        _ => None,
    }
}

fn row(v: &Value) -> Option<(f64, f64)> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Some((pair[0].as_f64()?, pair[1].as_f64()?)),
        Value::Object(map) => Some((map.get("N")?.as_f64()?, map.get("count")?.as_f64()?)),
        _ => None,
    }
}

fn from_csv(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| format!("missing column {name}"))
    };
    let (ni, ci) = (col("N")?, col("count")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        match (parse(ni), parse(ci)) {
            (Some(n), Some(c)) => out.push((n, c)),
            _ => return Err(format!("bad row {:?}", rec)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_shapes() {
        let pairs = json!([[2, 6], [3, 19]]);
        assert_eq!(from_json(&pairs), Some(vec![(2.0, 6.0), (3.0, 19.0)]));
        let report = json!({"results": [{"N": 2, "gamma": 1.0, "count": 6}]});
        assert_eq!(from_json(&report), Some(vec![(2.0, 6.0)]));
        let single = json!({"results": {"N": 3, "count": 19}});
        assert_eq!(from_json(&single), Some(vec![(3.0, 19.0)]));
        assert_eq!(from_json(&json!([[1, 2, 3]])), None);
    }

    #[test]
    fn csv_columns() {
        let t = from_csv("N,gamma,count\n2,1,6\n3,1,19\n").unwrap();
        assert_eq!(t, vec![(2.0, 6.0), (3.0, 19.0)]);
        assert!(from_csv("n,c\n1,2\n").is_err());
    }
}
