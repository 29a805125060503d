//! Machine-readable reports. JSON and CSV renderings of a report carry the
//! same numbers.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::plane::{CohRow, CohTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Input(format!("unknown format `{s}` (expected json or csv)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohReport {
    pub descriptor: String,
    pub window: [i64; 2],
    pub rows: Vec<CohRow>,
    pub flags: BTreeMap<String, Value>,
    pub seedpoints: Vec<[String; 3]>,
}

impl CohReport {
    pub fn new(descriptor: String, window: (i64, i64), table: &CohTable) -> Self {
        CohReport {
            descriptor,
            window: [window.0, window.1],
            rows: table.rows.clone(),
            flags: BTreeMap::new(),
            seedpoints: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv_writer();
        for r in &self.rows {
            w.serialize(r).map_err(csv_err)?;
        }
        finish(w)
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Input(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Input(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One CSV line per item, which must serialize to a flat record.
pub fn records_to_csv<T: Serialize>(items: &[T]) -> Result<String> {
    let mut w = csv_writer();
    for r in items {
        w.serialize(r).map_err(csv_err)?;
    }
    finish(w)
}

/// Pretty JSON with a trailing newline. `generated_at`, when given, is added
/// as a top-level field.
pub fn to_json<T: Serialize>(v: &T, generated_at: Option<u64>) -> Result<String> {
    let mut value = serde_json::to_value(v).map_err(|e| Error::Input(format!("json: {e}")))?;
    if let (Some(ts), Value::Object(map)) = (generated_at, &mut value) {
        map.insert("generated_at".into(), Value::from(ts));
    }
    let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::Input(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> CohReport {
        let table = CohTable { rows: vec![CohRow::new(-1, 0, 0, 0), CohRow::new(0, 1, 0, 0)] };
        CohReport::new("R1(side=2,a=-1,b=0)".into(), (-1, 0), &table)
    }

    #[test]
    fn json_shape() {
        let s = to_json(&report(), None).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["window"], serde_json::json!([-1, 0]));
        assert_eq!(v["rows"][1], serde_json::json!({"t": 0, "h0": 1, "h1": 0, "h2": 0, "chi": 1}));
        assert!(v.get("generated_at").is_none());
        let s = to_json(&report(), Some(7)).unwrap();
        assert!(s.contains("\"generated_at\": 7"));
    }

    #[test]
    fn csv_matches_json() {
        let csv = report().to_csv().unwrap();
        assert_eq!(csv, "t,h0,h1,h2,chi\n-1,0,0,0,0\n0,1,0,0,1\n");
    }

    #[test]
    fn formats() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
