//! Curve emission, spec parsing and the command-line front end.

pub mod cli;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, RawProblemSpec, Scheme, SchemeParams, SchemePoint};

/// CSV header of every emitted curve.
pub const CSV_HEADER: [&str; 6] = ["scheme", "lambda", "gamma", "D_s", "D_w", "feasible"];

/// One line of an emitted curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub scheme: Scheme,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "D_s")]
    pub d_s: f64,
    #[serde(rename = "D_w")]
    pub d_w: f64,
    pub feasible: Option<bool>,
}

impl From<&SchemePoint> for CurveRow {
    fn from(p: &SchemePoint) -> Self {
        let (lambda, gamma) = match p.params {
            SchemeParams::Mismatch { lambda, gamma } => (Some(lambda), Some(gamma)),
            _ => (None, None),
        };
        let feasible = matches!(p.params, SchemeParams::Theorem3(_)).then_some(true);
        CurveRow {
            scheme: p.scheme,
            lambda,
            gamma,
            d_s: p.d_s,
            d_w: p.d_w,
            feasible,
        }
    }
}

impl crate::frontier::Tradeoff for CurveRow {
    fn d_s(&self) -> f64 {
        self.d_s
    }
    fn d_w(&self) -> f64 {
        self.d_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Twelve significant digits, dot decimal separator.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Writes rows as CSV (fixed header) or as a JSON array.
pub fn emit_rows(rows: &[CurveRow], format: Format, sink: &mut dyn Write) -> Result<()> {
    let io_err = |e: csv::Error| Error::SinkWriteError(e.to_string());
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(CSV_HEADER).map_err(io_err)?;
            for r in rows {
                w.write_record([
                    r.scheme.as_str().to_string(),
                    opt_float(r.lambda),
                    opt_float(r.gamma),
                    format_float(r.d_s),
                    format_float(r.d_w),
                    r.feasible.map(|b| b.to_string()).unwrap_or_default(),
                ])
                .map_err(io_err)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *sink, rows)
                .map_err(|e| Error::SinkWriteError(e.to_string()))?;
            writeln!(sink)?;
        }
    }
    Ok(())
}

/// Emits scheme points with [`emit_rows`].
pub fn emit_curve(points: &[SchemePoint], format: Format, sink: &mut dyn Write) -> Result<()> {
    let rows: Vec<CurveRow> = points.iter().map(CurveRow::from).collect();
    emit_rows(&rows, format, sink)
}

/// Reads rows written by [`emit_rows`] in CSV form.
pub fn parse_curve_csv(source: impl Read) -> Result<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_reader(source);
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

/// Linear value, or a power ratio with a `dB` suffix (`"20dB"` is 100).
pub fn parse_db(text: &str) -> Result<f64> {
    let t = text.trim();
    let (number, is_db) = match t.strip_suffix("dB").or_else(|| t.strip_suffix("db")) {
        Some(rest) => (rest.trim(), true),
        None => (t, false),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: `{text}`")))?;
    Ok(if is_db {
        10f64.powf(value / 10.0)
    } else {
        value
    })
}

/// Parses a JSON problem spec. `power`, `noise_strong` and `noise_weak` may
/// be numbers or strings such as `"20dB"`.
pub fn parse_spec(json: &str) -> Result<ProblemSpec> {
    let mut value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        for key in ["power", "noise_strong", "noise_weak"] {
            if let Some(serde_json::Value::String(s)) = obj.get(key) {
                let v = parse_db(s)?;
                obj.insert(key.to_string(), serde_json::json!(v));
            }
        }
    }
    let raw: RawProblemSpec =
        serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    raw.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Theorem3Params;

    fn sample_points() -> Vec<SchemePoint> {
        vec![
            SchemePoint::new(
                0.123_456_789_012_345,
                0.5,
                Scheme::BcClosed,
                SchemeParams::Mismatch {
                    lambda: 0.25,
                    gamma: 1.0 / 3.0,
                },
            ),
            SchemePoint::new(
                1e-7,
                2.0 / 3.0,
                Scheme::Separation,
                SchemeParams::Separation { beta: 0.5 },
            ),
            SchemePoint::new(
                0.01,
                0.02,
                Scheme::General,
                SchemeParams::Theorem3(Box::new(Theorem3Params {
                    l: 0,
                    k_prime: 0,
                    p: vec![1.0],
                    p_prime: vec![0.0],
                    p_dprime: vec![],
                    d: vec![0.01],
                    d_prime: vec![0.02],
                    d_dprime: vec![],
                })),
            ),
        ]
    }

    #[test]
    fn one_point_gives_two_lines() {
        let mut out = Vec::new();
        emit_curve(&sample_points()[..1], Format::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "scheme,lambda,gamma,D_s,D_w,feasible");
        assert_eq!(
            lines[1],
            "bc_closed,2.50000000000e-1,3.33333333333e-1,1.23456789012e-1,5.00000000000e-1,"
        );
    }

    #[test]
    fn csv_round_trip_to_twelve_digits() {
        let points = sample_points();
        let mut out = Vec::new();
        emit_curve(&points, Format::Csv, &mut out).unwrap();
        let rows = parse_curve_csv(out.as_slice()).unwrap();
        assert_eq!(rows.len(), points.len());
        for (row, p) in rows.iter().zip(&points) {
            let orig = CurveRow::from(p);
            assert_eq!(row.scheme, orig.scheme);
            assert_eq!(row.feasible, orig.feasible);
            assert!((row.d_s - orig.d_s).abs() <= 5e-12 * orig.d_s);
            assert!((row.d_w - orig.d_w).abs() <= 5e-12 * orig.d_w);
            assert_eq!(row.lambda.is_some(), orig.lambda.is_some());
        }
        assert_eq!(rows[1].lambda, None);
        assert_eq!(rows[2].feasible, Some(true));
    }

    #[test]
    fn json_mirrors_field_names() {
        let mut out = Vec::new();
        emit_curve(&sample_points()[..1], Format::Json, &mut out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        let row = &v[0];
        for key in CSV_HEADER {
            assert!(row.get(key).is_some(), "{key}");
        }
        assert_eq!(row["scheme"], "bc_closed");
    }

    #[test]
    fn decibel_parsing() {
        assert!((parse_db("20dB").unwrap() - 100.0).abs() < 1e-12);
        assert!((parse_db("0 dB").unwrap() - 1.0).abs() < 1e-15);
        assert!((parse_db("-3dB").unwrap() - 0.501_187_233_627_272_2).abs() < 1e-15);
        assert_eq!(parse_db("2.5").unwrap(), 2.5);
        assert!(parse_db("loud").is_err());
    }

    #[test]
    fn spec_accepts_decibel_strings() {
        let spec = parse_spec(
            r#"{"variances":[1.0,0.25],"subchannels":2,"power":"20dB","noise_strong":1.0,"noise_weak":"20dB"}"#,
        )
        .unwrap();
        assert!((spec.power() - 100.0).abs() < 1e-12);
        assert!(parse_spec(
            r#"{"variances":[],"subchannels":1,"power":1,"noise_strong":1,"noise_weak":1}"#
        )
        .is_err());
    }

    struct Broken;
    impl Write for Broken {
        fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
            Err(std::io::Error::other("closed"))
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Err(std::io::Error::other("closed"))
        }
    }

    #[test]
    fn failing_sink_reports_error() {
        let err = emit_curve(&sample_points(), Format::Csv, &mut Broken).unwrap_err();
        assert!(matches!(err, Error::SinkWriteError(_)));
    }
}
