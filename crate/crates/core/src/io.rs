//! CSV and JSON serialization of grid functions and decay profiles.
//!
//! CSV layout: a header line `# n=<dim> side=<real> res=<ints>` (optionally
//! `lower=<reals>`), then one sample per line in row-major cell order. JSON
//! carries `dimension`, `side`, `resolution`, optional `lower` and `mask`, and
//! `samples` (one per active cell).

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::czd::DecayProfile;
use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guess from the file extension (`.json` is JSON, anything else CSV).
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Resolution {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MaskFlag {
    Bool(bool),
    Int(u8),
}

#[derive(Debug, Clone, Deserialize)]
struct JsonIn {
    dimension: usize,
    side: f64,
    resolution: Resolution,
    #[serde(default)]
    lower: Option<Vec<f64>>,
    #[serde(default)]
    mask: Option<Vec<MaskFlag>>,
    samples: Vec<f64>,
}

#[derive(Serialize)]
struct JsonOut<'a> {
    dimension: usize,
    side: f64,
    resolution: usize,
    lower: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    mask: Option<&'a [bool]>,
    samples: Vec<f64>,
}

fn uniform_res(dim: usize, res: &[usize]) -> Result<usize> {
    if res.len() != 1 && res.len() != dim {
        return Err(Error::Parse(format!("expected 1 or {dim} resolution values, found {}", res.len())));
    }
    if res.iter().any(|&r| r != res[0]) {
        return Err(Error::Parse("resolution must be equal on every axis".into()));
    }
    Ok(res[0])
}

fn build_domain(dim: usize, side: f64, res: usize, lower: Option<&[f64]>) -> Result<Domain> {
    let d = Domain::new(dim, side, res)?;
    match lower {
        Some(l) => d.with_lower(l),
        None => Ok(d),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split([',', 'x'])
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad value '{t}' for {key}"))))
        .collect()
}

pub fn parse_csv(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing '# n=… side=… res=…' header".into()))?;
    let (mut dim, mut side, mut res, mut lower) = (None, None, None, None);
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header token '{tok}'")))?;
        match k {
            "n" => dim = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad dimension '{v}'")))?),
            "side" => side = Some(v.parse::<f64>().map_err(|_| Error::Parse(format!("bad side '{v}'")))?),
            "res" => res = Some(parse_list::<usize>("res", v)?),
            "lower" => lower = Some(parse_list::<f64>("lower", v)?),
            "mask" => return Err(Error::Parse("masks are only supported in JSON input".into())),
            _ => return Err(Error::Parse(format!("unknown header key '{k}'"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("header lacks n=".into()))?;
    let side = side.ok_or_else(|| Error::Parse("header lacks side=".into()))?;
    let res = uniform_res(dim, &res.ok_or_else(|| Error::Parse("header lacks res=".into()))?)?;
    let domain = build_domain(dim, side, res, lower.as_deref())?;
    let samples = lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse::<f64>().map_err(|_| Error::Parse(format!("bad sample '{l}'"))))
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(Arc::new(domain), samples)
}

pub fn parse_json(text: &str) -> Result<GridFunction> {
    let raw: JsonIn = serde_json::from_str(text)?;
    let res = match raw.resolution {
        Resolution::Uniform(r) => r,
        Resolution::PerAxis(v) => uniform_res(raw.dimension, &v)?,
    };
    let mut domain = build_domain(raw.dimension, raw.side, res, raw.lower.as_deref())?;
    if let Some(mask) = raw.mask {
        let flags = mask
            .into_iter()
            .map(|m| match m {
                MaskFlag::Bool(b) => b,
                MaskFlag::Int(i) => i != 0,
            })
            .collect();
        domain = domain.with_mask(flags)?;
    }
    GridFunction::new(Arc::new(domain), raw.samples)
}

pub fn to_csv(f: &GridFunction) -> Result<String> {
    let d = f.domain();
    if d.mask().is_some() {
        return Err(Error::Parse("masked domains can only be written as JSON".into()));
    }
    let lower: Vec<String> = d.lower().iter().map(|v| v.to_string()).collect();
    let mut out = format!("# n={} side={} res={} lower={}\n", d.dim(), d.side(), d.res(), lower.join(","));
    for v in f.samples() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    Ok(out)
}

pub fn to_json(f: &GridFunction) -> Result<String> {
    let d = f.domain();
    let out = JsonOut {
        dimension: d.dim(),
        side: d.side(),
        resolution: d.res(),
        lower: d.lower(),
        mask: d.mask(),
        samples: f.samples(),
    };
    Ok(serde_json::to_string_pretty(&out)?)
}

pub fn read_function(path: &Path, format: Option<Format>) -> Result<GridFunction> {
    let text = fs::read_to_string(path)?;
    match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Csv => parse_csv(&text),
        Format::Json => parse_json(&text),
    }
}

pub fn write_function(f: &GridFunction, path: &Path, format: Option<Format>) -> Result<()> {
    let text = match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Csv => to_csv(f)?,
        Format::Json => to_json(f)?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// Two-column `t,fraction` table.
pub fn profile_csv(profile: &DecayProfile) -> String {
    let mut out = String::from("t,fraction\n");
    for (t, m) in profile.thresholds.iter().zip(&profile.fractions) {
        out.push_str(&format!("{t},{m}\n"));
    }
    out
}
