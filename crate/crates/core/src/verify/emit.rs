//! Byte-stable JSON and CSV output: sorted keys, 17 significant digits.

use std::io;
use std::path::Path;

use serde_json::ser::Formatter;

use super::Report;
use crate::error::{Error, Result};
use crate::model::ScanRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Usage(format!("unknown format {s:?} (expected json or csv)"))),
        }
    }
}

/// Floats as `d.dddddddddddddddde±x`; non-finite values as `null`.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{}", fmt_f64(value))
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn report_json(report: &Report) -> Result<String> {
    // going through Value sorts every object's keys
    let value = serde_json::to_value(report).map_err(|e| Error::Numerical {
        message: format!("report serialization failed: {e}"),
        trace: Vec::new(),
    })?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    serde::Serialize::serialize(&value, &mut ser).expect("writing to memory");
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("JSON is UTF-8"))
}

/// Scan table: `r, alpha, beta[, gamma], lambda, mu, defect_frobenius, defect_max_abs`.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let with_gamma = rows.iter().any(|r| r.gamma.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["r", "alpha", "beta"];
    if with_gamma {
        header.push("gamma");
    }
    header.extend(["lambda", "mu", "defect_frobenius", "defect_max_abs"]);
    w.write_record(&header).expect("writing to memory");
    for row in rows {
        let mut rec = vec![fmt_f64(row.r), fmt_f64(row.alpha), fmt_f64(row.beta)];
        if with_gamma {
            rec.push(row.gamma.map(fmt_f64).unwrap_or_default());
        }
        rec.extend([
            fmt_f64(row.lambda),
            fmt_f64(row.mu),
            fmt_f64(row.defect_frobenius),
            fmt_f64(row.defect_max_abs),
        ]);
        w.write_record(&rec).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}

/// The scan table when the report has one; otherwise one row per check:
/// `name, params, max_residual, tolerance, pass, note`.
pub fn report_csv(report: &Report) -> String {
    if let Some(rows) = &report.scan {
        return scan_csv(rows);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "params", "max_residual", "tolerance", "pass", "note"])
        .expect("writing to memory");
    for c in &report.checks {
        let params = serde_json::to_string(&c.params).expect("params serialize");
        w.write_record([
            c.name.clone(),
            params,
            fmt_f64(c.max_residual),
            fmt_f64(c.tolerance),
            c.pass.to_string(),
            c.note.clone().unwrap_or_default(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}

pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Json => report_json(report)?,
        Format::Csv => report_csv(report),
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{param_map, CheckResult};
    use std::collections::BTreeMap;

    #[test]
    fn empty_report_is_valid_json() {
        let r = Report::new("AMBIENT", BTreeMap::new(), 7);
        let text = report_json(&r).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 0);
        assert_eq!(v["summary"]["pass"], 0);
        assert_eq!(v["summary"]["fail"], 0);
        assert!(text.starts_with("{\"checks\":[],\"params\":{}"));
    }

    #[test]
    fn floats_carry_17_significant_digits() {
        let mut r = Report::new("X", param_map([("r", 0.1)]), 0);
        r.push(CheckResult::new("c", BTreeMap::new(), 1.0 / 3.0, f64::INFINITY));
        let text = report_json(&r).unwrap();
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
        assert!(text.contains("\"r\":1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"tolerance\":null"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["checks"][0]["max_residual"].as_f64().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn scan_columns() {
        let row = ScanRow {
            r: 0.5,
            alpha: 1.0,
            beta: 2.0,
            gamma: None,
            lambda: 3.0,
            mu: 0.0,
            defect_frobenius: 4.0,
            defect_max_abs: 1.0,
            bound: 0.0,
        };
        let a = scan_csv(&[row]);
        assert!(a.starts_with("r,alpha,beta,lambda,mu,defect_frobenius,defect_max_abs\n"));
        let b = scan_csv(&[ScanRow { gamma: Some(0.0), ..row }]);
        assert!(b.starts_with("r,alpha,beta,gamma,lambda,mu,defect_frobenius,defect_max_abs\n"));
        assert_eq!(b.lines().count(), 2);
    }

    #[test]
    fn io_error_names_path() {
        let r = Report::new("X", BTreeMap::new(), 0);
        let err = emit_report(&r, Format::Json, Path::new("/nonexistent/dir/out.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.json"));
    }
}
