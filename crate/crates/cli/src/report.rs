//! Check results and their JSON/CSV report documents.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Result};

/// A measured quantity. Non-finite values serialize as the strings `inf`, `-inf` and `nan`.
#[derive(Debug, Clone, Copy)]
pub struct Measured(pub f64);

impl PartialEq for Measured {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 || (self.0.is_nan() && other.0.is_nan())
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

fn parse_value(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

impl Serialize for Measured {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&fmt_value(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Measured {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Measured(v)),
            Raw::Text(t) => parse_value(&t)
                .map(Measured)
                .ok_or_else(|| serde::de::Error::custom(format!("bad measured value '{t}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub tag: String,
    pub pass: bool,
    pub measured: BTreeMap<String, Measured>,
    pub tolerance: f64,
    /// The cube or function violating the bound; always set on failure.
    pub witness: Option<String>,
    /// Wall-clock seconds. Not written to reports, which stay byte-identical across runs.
    #[serde(skip)]
    pub runtime: Option<f64>,
}

impl PartialEq for CheckResult {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
            && self.pass == other.pass
            && self.measured == other.measured
            && self.tolerance == other.tolerance
            && self.witness == other.witness
    }
}

impl CheckResult {
    pub fn value(&self, key: &str) -> Option<f64> {
        self.measured.get(key).map(|m| m.0)
    }

    pub fn summary(&self) -> String {
        let vals: Vec<String> = self.measured.iter().map(|(k, v)| format!("{k}={}", fmt_value(v.0))).collect();
        let mut s = format!("{:<10} {} {}", self.tag, if self.pass { "PASS" } else { "FAIL" }, vals.join(" "));
        if let Some(w) = self.witness.as_ref().filter(|_| !self.pass) {
            s.push_str(&format!(" witness: {w}"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(CliError::Report(format!("unknown report format '{s}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    results: Vec<CheckResult>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    tag: String,
    pass: bool,
    tolerance: f64,
    measured: String,
    witness: String,
}

fn encode_measured(m: &BTreeMap<String, Measured>) -> String {
    m.iter().map(|(k, v)| format!("{k}={}", fmt_value(v.0))).collect::<Vec<_>>().join(";")
}

fn decode_measured(s: &str) -> Result<BTreeMap<String, Measured>> {
    s.split(';')
        .filter(|kv| !kv.is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Report(format!("bad measured entry '{kv}'")))?;
            let v = parse_value(v).ok_or_else(|| CliError::Report(format!("bad measured value '{v}'")))?;
            Ok((k.to_string(), Measured(v)))
        })
        .collect()
}

pub fn render_report(results: &[CheckResult], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&JsonReport { results: results.to_vec() })?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(["tag", "pass", "tolerance", "measured", "witness"])?;
            for r in results {
                w.serialize(CsvRow {
                    tag: r.tag.clone(),
                    pass: r.pass,
                    tolerance: r.tolerance,
                    measured: encode_measured(&r.measured),
                    witness: r.witness.clone().unwrap_or_default(),
                })?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Report(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Report(e.to_string()))
        }
    }
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<CheckResult>> {
    match format {
        ReportFormat::Json => Ok(serde_json::from_str::<JsonReport>(text)?.results),
        ReportFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(text.as_bytes());
            rdr.deserialize::<CsvRow>()
                .map(|row| {
                    let row = row?;
                    Ok(CheckResult {
                        tag: row.tag,
                        pass: row.pass,
                        measured: decode_measured(&row.measured)?,
                        tolerance: row.tolerance,
                        witness: (!row.witness.is_empty()).then_some(row.witness),
                        runtime: None,
                    })
                })
                .collect()
        }
    }
}

pub fn emit_report(results: &[CheckResult], format: ReportFormat, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, render_report(results, format)?)?;
    Ok(())
}

pub fn read_report(path: &Path, format: ReportFormat) -> Result<Vec<CheckResult>> {
    parse_report(&std::fs::read_to_string(path)?, format)
}
