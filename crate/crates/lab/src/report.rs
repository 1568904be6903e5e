//! Experiment reports and their two on-disk forms: a JSON document and a
//! flat CSV table.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// JSON has no infinities, so non-finite floats travel as the strings
/// `inf`, `-inf` and `NaN`.
mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Num {
        Finite(f64),
        Text(String),
    }

    fn wrap(v: f64) -> Num {
        if v.is_finite() {
            Num::Finite(v)
        } else {
            Num::Text(v.to_string())
        }
    }

    fn unwrap<E: serde::de::Error>(n: Num) -> Result<f64, E> {
        match n {
            Num::Finite(v) => Ok(v),
            Num::Text(t) => t.parse().map_err(|_| E::custom(format!("'{t}' is not a number"))),
        }
    }

    pub mod one {
        use super::*;

        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            wrap(*v).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            unwrap(Num::deserialize(d)?)
        }
    }

    pub mod maybe {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(wrap).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Num>::deserialize(d)?.map(unwrap).transpose()
        }
    }

    pub mod pairs {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[(String, f64)], s: S) -> Result<S::Ok, S::Error> {
            let wrapped: Vec<(&str, Num)> = v.iter().map(|(k, x)| (k.as_str(), wrap(*x))).collect();
            wrapped.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, f64)>, D::Error> {
            Vec::<(String, Num)>::deserialize(d)?.into_iter().map(|(k, n)| Ok((k, unwrap(n)?))).collect()
        }
    }
}

/// One measured quantity at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    #[serde(with = "real::pairs")]
    pub params: Vec<(String, f64)>,
    #[serde(with = "real::one")]
    pub measured: f64,
    #[serde(with = "real::maybe")]
    pub predicted: Option<f64>,
    #[serde(with = "real::maybe")]
    pub margin: Option<f64>,
    pub pass: Option<bool>,
}

impl Row {
    pub fn new(quantity: impl Into<String>, params: &[(&str, f64)], measured: f64) -> Self {
        Row {
            quantity: quantity.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            measured,
            predicted: None,
            margin: None,
            pass: None,
        }
    }

    pub fn predicted(mut self, value: f64) -> Self {
        self.predicted = Some(value);
        self
    }

    pub fn margin(mut self, value: f64) -> Self {
        self.margin = Some(value);
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }
}

/// A fitted log-log slope next to the exponent it should match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub quantity: String,
    #[serde(with = "real::pairs")]
    pub params: Vec<(String, f64)>,
    pub slope: f64,
    pub predicted: f64,
    pub tolerance: f64,
    /// Only `slope <= predicted + tolerance` is required.
    pub upper_only: bool,
    pub max_relative_residual: f64,
    pub pass: bool,
}

impl SlopeRecord {
    /// Distance to the nearest edge of the accepted interval; negative on failure.
    pub fn margin(&self) -> f64 {
        if self.upper_only {
            self.predicted + self.tolerance - self.slope
        } else {
            self.tolerance - (self.slope - self.predicted).abs()
        }
    }
}

/// Outcome of one acceptance rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub rule: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub quick: bool,
    pub profile: String,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<Row>,
    pub slopes: Vec<SlopeRecord>,
    pub checks: Vec<Check>,
    pub timings: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, quick: bool, profile: String, config: BTreeMap<String, String>) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            quick,
            profile,
            config,
            rows: Vec::new(),
            slopes: Vec::new(),
            checks: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn row(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn check(&mut self, rule: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { rule: rule.into(), pass, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Header and records of the flat table.
    pub fn flat_table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut names: Vec<String> = Vec::new();
        let all_params = self.rows.iter().map(|r| &r.params).chain(self.slopes.iter().map(|s| &s.params));
        for params in all_params {
            for (k, _) in params {
                if !names.contains(k) {
                    names.push(k.clone());
                }
            }
        }
        let mut header = vec!["experiment".to_string(), "quantity".to_string()];
        header.extend(names.iter().cloned());
        header.extend(["measured", "predicted", "margin", "pass"].map(String::from));
        let param_cells = |params: &[(String, f64)]| -> Vec<String> {
            names
                .iter()
                .map(|n| params.iter().find(|(k, _)| k == n).map(|(_, v)| fmt_float(*v)).unwrap_or_default())
                .collect()
        };
        let mut records = Vec::new();
        for r in &self.rows {
            let mut rec = vec![self.experiment.clone(), r.quantity.clone()];
            rec.extend(param_cells(&r.params));
            rec.push(fmt_float(r.measured));
            rec.push(r.predicted.map(fmt_float).unwrap_or_default());
            rec.push(r.margin.map(fmt_float).unwrap_or_default());
            rec.push(r.pass.map(|p| p.to_string()).unwrap_or_default());
            records.push(rec);
        }
        for s in &self.slopes {
            let mut rec = vec![self.experiment.clone(), format!("slope:{}", s.quantity)];
            rec.extend(param_cells(&s.params));
            rec.push(fmt_float(s.slope));
            rec.push(fmt_float(s.predicted));
            rec.push(fmt_float(s.margin()));
            rec.push(s.pass.to_string());
            records.push(rec);
        }
        (header, records)
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Paths of the two files written for a report in `dir`.
pub fn report_paths(dir: &Path, experiment: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{experiment}.json")), dir.join(format!("{experiment}.csv")))
}

/// Writes `<experiment>.json` and `<experiment>.csv` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> LabResult<(PathBuf, PathBuf)> {
    if report.rows.is_empty() && report.slopes.is_empty() {
        return Err(LabError::io(dir, format!("refusing to write an empty table for '{}'", report.experiment)));
    }
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let (json_path, csv_path) = report_paths(dir, &report.experiment);
    let json = serde_json::to_string_pretty(report).map_err(|e| LabError::io(&json_path, e))?;
    fs::write(&json_path, json + "\n").map_err(|e| LabError::io(&json_path, e))?;
    let (header, records) = report.flat_table();
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| LabError::io(&csv_path, e))?;
    w.write_record(&header).map_err(|e| LabError::io(&csv_path, e))?;
    for rec in &records {
        w.write_record(rec).map_err(|e| LabError::io(&csv_path, e))?;
    }
    w.flush().map_err(|e| LabError::io(&csv_path, e))?;
    Ok((json_path, csv_path))
}

pub fn read_report_json(path: &Path) -> LabResult<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::io(path, e))
}

/// A flat table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatTable {
    pub header: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl FlatTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses the cell at (`record`, `name`) as a float; empty cells are `None`.
    pub fn float(&self, record: usize, name: &str) -> Option<f64> {
        let cell = &self.records.get(record)?[self.column(name)?];
        cell.parse().ok()
    }
}

pub fn read_flat_table(path: &Path) -> LabResult<FlatTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| LabError::io(path, e))?;
    let header = r.headers().map_err(|e| LabError::io(path, e))?.iter().map(String::from).collect();
    let records = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| LabError::io(path, e))?;
    Ok(FlatTable { header, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", false, "exp-ratio(a=1)".into(), BTreeMap::new());
        r.row(Row::new("norm", &[("n", 16.0), ("s", 2.0)], 0.1 + 0.2).predicted(1.0 / 3.0).pass(true));
        r.row(Row::new("norm", &[("n", 32.0)], f64::MIN_POSITIVE));
        r.row(Row::new("gap", &[("t", 0.25)], -1.0e300).margin(std::f64::consts::PI));
        r
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let report = sample();
        let (_, csv_path) = write_report(&report, dir.path()).unwrap();
        let table = read_flat_table(&csv_path).unwrap();
        assert_eq!(table.header, ["experiment", "quantity", "n", "s", "t", "measured", "predicted", "margin", "pass"]);
        assert_eq!(table.records.len(), 3);
        for (i, row) in report.rows.iter().enumerate() {
            assert_eq!(table.float(i, "measured").unwrap().to_bits(), row.measured.to_bits());
        }
        assert_eq!(table.float(0, "predicted").unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(table.float(2, "margin").unwrap().to_bits(), std::f64::consts::PI.to_bits());
        assert_eq!(table.float(1, "s"), None);
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let report = sample();
        let (json_path, _) = write_report(&report, dir.path()).unwrap();
        assert_eq!(read_report_json(&json_path).unwrap(), report);
    }

    #[test]
    fn infinite_values_survive_json() {
        let dir = tempfile::tempdir().unwrap();
        let mut report = sample();
        report.row(Row::new("norm", &[("p", f64::INFINITY), ("q", 2.0)], f64::INFINITY).margin(f64::NEG_INFINITY));
        let (json_path, _) = write_report(&report, dir.path()).unwrap();
        let text = std::fs::read_to_string(&json_path).unwrap();
        assert!(text.contains("\"inf\"") && text.contains("\"-inf\""));
        assert_eq!(read_report_json(&json_path).unwrap(), report);
    }

    #[test]
    fn empty_report_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let r = ExperimentReport::new("empty", false, String::new(), BTreeMap::new());
        let err = write_report(&r, dir.path()).unwrap_err();
        assert!(matches!(err, LabError::Io { .. }));
        assert!(!dir.path().join("empty.csv").exists());
    }
}
