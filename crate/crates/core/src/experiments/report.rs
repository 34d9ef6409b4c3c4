//! Sweep reports and their CSV/JSON serialisation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One level of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub h: f64,
    /// `‖f − Af‖_p` on the fine grid.
    pub error: f64,
    /// `‖f‖_p + |f|_{W_p^k}`.
    pub sobolev_norm: f64,
    /// `error / (h^k · sobolev_norm)`.
    pub ratio: f64,
}

/// Stability factor estimate at one `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QRow {
    pub h: f64,
    pub q_max: f64,
    pub q_mean: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `convergence`, `quasi`, `logfactor` or `stability`.
    pub kind: String,
    pub target: String,
    pub dim: usize,
    pub p: String,
    pub k: usize,
    pub rows: Vec<ErrorRow>,
    pub fitted_order: Option<f64>,
    /// Set when every error is zero and no order can be fitted.
    pub degenerate: bool,
    pub q_factors: Vec<QRow>,
    /// Scalar results such as regression slopes.
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
}

impl ErrorReport {
    pub fn new(kind: &str, target: &str, dim: usize, p: impl ToString, k: usize) -> Self {
        Self {
            kind: kind.to_string(),
            target: target.to_string(),
            dim,
            p: p.to_string(),
            k,
            rows: Vec::new(),
            fitted_order: None,
            degenerate: false,
            q_factors: Vec::new(),
            summary: BTreeMap::new(),
            notes: Vec::new(),
            config: BTreeMap::new(),
            seed: 0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// `(h, metric, value)` triples in emission order; summary values have no `h`.
    pub fn records(&self) -> Vec<Record> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (m, v) in [("error", r.error), ("sobolev_norm", r.sobolev_norm), ("ratio", r.ratio)] {
                out.push(Record { h: Some(r.h), metric: m.to_string(), value: v });
            }
        }
        for q in &self.q_factors {
            out.push(Record { h: Some(q.h), metric: "q_max".into(), value: q.q_max });
            out.push(Record { h: Some(q.h), metric: "q_mean".into(), value: q.q_mean });
        }
        if let Some(o) = self.fitted_order {
            out.push(Record { h: None, metric: "fitted_order".into(), value: o });
        }
        for (m, &v) in &self.summary {
            out.push(Record { h: None, metric: m.clone(), value: v });
        }
        out
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub h: Option<f64>,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Parameter(format!("unknown report format {s:?}; expected csv or json"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// Serialises any record type to CSV text with a header row.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

pub fn render_report(report: &ErrorReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut text = to_csv(&report.records())?;
            if report.rows.is_empty() && report.q_factors.is_empty() && report.summary.is_empty() {
                text = "h,metric,value\n".into();
            }
            Ok(text)
        }
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
    }
}

pub fn emit_report(report: &ErrorReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(report, format)?)?;
    Ok(())
}

pub fn read_csv_records(path: &Path) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_json_report(path: &Path) -> Result<ErrorReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ErrorReport {
        let mut r = ErrorReport::new("convergence", "bspline3_1d", 1, "2", 3);
        r.rows.push(ErrorRow { h: 0.25, error: 1.5e-3, sobolev_norm: 5.2, ratio: 0.018 });
        r.rows.push(ErrorRow { h: 0.125, error: 1.9e-4, sobolev_norm: 5.2, ratio: 0.0187 });
        r.fitted_order = Some(2.98);
        r.summary.insert("r_squared".into(), 0.999);
        r.config.insert("fine_factor".into(), "8".into());
        r.seed = 7;
        r
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let report = sample();
        emit_report(&report, ReportFormat::Csv, &path).unwrap();
        assert_eq!(read_csv_records(&path).unwrap(), report.records());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("h,metric,value\n0.25,error,"));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&sample(), ReportFormat::Json, &path).unwrap();
        let back = read_json_report(&path).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.config["fine_factor"], "8");
        let bad = dir.path().join("missing").join("r.json");
        assert_eq!(emit_report(&sample(), ReportFormat::Json, &bad).unwrap_err().exit_code(), 4);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
