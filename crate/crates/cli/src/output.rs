//! Tabular output as CSV or JSON lines. Floats are written with 17
//! significant digits so that every value survives a round trip.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::value::RawValue;

use crate::config::OutputFormat;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    /// Missing values are empty in CSV and `null` in JSON.
    MaybeFloat(Option<f64>),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::MaybeFloat(x) => x.map(fmt_float).unwrap_or_default(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// `{:.16e}`, or `nan`/`inf`/`-inf` for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_float(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { fmt_float(x) } else { "null".into() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

/// One output row with named columns in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Record(pub Vec<(&'static str, Cell)>);

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            match v {
                Cell::Float(x) => map.serialize_entry(k, &json_float(*x))?,
                Cell::MaybeFloat(Some(x)) => map.serialize_entry(k, &json_float(*x))?,
                Cell::MaybeFloat(None) => map.serialize_entry(k, &())?,
                Cell::Bool(b) => map.serialize_entry(k, b)?,
                Cell::Text(t) => map.serialize_entry(k, t)?,
            }
        }
        map.end()
    }
}

pub fn write_records<W: Write>(out: W, format: OutputFormat, records: &[Record]) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                w.write_record(first.0.iter().map(|(k, _)| *k)).map_err(csv_error)?;
            }
            for r in records {
                w.write_record(r.0.iter().map(|(_, v)| v.csv())).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Jsonl => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Record> {
        vec![
            Record(vec![
                ("x", Cell::Float(0.1)),
                ("y", Cell::MaybeFloat(None)),
                ("ok", Cell::Bool(true)),
                ("who", Cell::Text("FDR".into())),
            ]),
            Record(vec![
                ("x", Cell::Float(-2.5e-300)),
                ("y", Cell::MaybeFloat(Some(1.0))),
                ("ok", Cell::Bool(false)),
                ("who", Cell::Text("HDR".into())),
            ]),
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_records(&mut buf, OutputFormat::Csv, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,ok,who");
        assert_eq!(lines[1], "1.0000000000000001e-1,,true,FDR");
        assert_eq!(lines[2], "-2.5000000000000000e-300,1.0000000000000000e0,false,HDR");
    }

    #[test]
    fn jsonl_layout_and_round_trip() {
        let mut buf = Vec::new();
        write_records(&mut buf, OutputFormat::Jsonl, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["x"].as_f64(), Some(0.1));
        assert!(first["y"].is_null());
        assert_eq!(first["who"], "FDR");
        assert!(text.starts_with(r#"{"x":1.0000000000000001e-1,"#));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
