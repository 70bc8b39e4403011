//! Check suite, function ingestion and synthesis, and report emission for `campanato-core`.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;

use std::path::Path;
use std::sync::Arc;

use campanato_core::io::{read_function, write_function, Format};
use campanato_core::synth::Generator;
use campanato_core::{Domain, FamilyPolicy, GridFunction};
use rayon::prelude::*;

pub use checks::{lookup, Check, CHECKS};
pub use config::{Exponents, SuiteConfig, Tolerances};
pub use error::{CliError, Result};
pub use report::{emit_report, parse_report, read_report, render_report, CheckResult, Measured, ReportFormat};

/// Environment variable overriding the report output directory.
pub const OUTPUT_DIR_ENV: &str = "CAMPANATO_OUTPUT_DIR";

/// Run every configured check in parallel; results keep the configured order.
/// Unknown tags and invalid settings are rejected before any check runs.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let checks: Vec<&Check> = cfg.checks.iter().map(|t| lookup(t).expect("validated")).collect();
    Ok(checks.par_iter().map(|c| checks::run_check(c, cfg)).collect())
}

pub fn all_pass(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}

pub fn ingest(path: &Path, format: Option<Format>) -> Result<GridFunction> {
    Ok(read_function(path, format)?)
}

pub fn emit_function(f: &GridFunction, path: &Path, format: Option<Format>) -> Result<()> {
    Ok(write_function(f, path, format)?)
}

/// Sample a generator on the unit box `[0, side]^dim` with `res` cells per axis.
pub fn synthesize(generator: &Generator, dim: usize, side: f64, res: usize, seed: u64) -> Result<GridFunction> {
    let d = Arc::new(Domain::new(dim, side, res)?);
    Ok(campanato_core::synth::generate(d, generator, seed)?)
}

/// Parse `dyadic`, `anchored`, `sliding:STRIDE:L1,L2,...` or `centered:K1,K2,...`.
pub fn parse_family(s: &str) -> Result<FamilyPolicy> {
    let bad = || CliError::Config(format!("bad family '{s}'"));
    let list = |t: &str| -> Result<Vec<usize>> { t.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect() };
    let mut parts = s.splitn(3, ':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some("dyadic"), None, None) => Ok(FamilyPolicy::Dyadic),
        (Some("anchored"), None, None) => Ok(FamilyPolicy::Anchored),
        (Some("sliding"), Some(stride), Some(lengths)) => Ok(FamilyPolicy::Sliding {
            stride: stride.parse().map_err(|_| bad())?,
            lengths: list(lengths)?,
        }),
        (Some("centered"), Some(ks), None) => Ok(FamilyPolicy::Centered { half_sides: list(ks)? }),
        _ => Err(bad()),
    }
}

/// Build a generator from its kind name and the parameters that kind uses.
pub fn generator_from_parts(
    kind: &str,
    value: Option<f64>,
    beta: Option<f64>,
    center: Option<f64>,
    amplitude: Option<f64>,
    pieces: Option<usize>,
    sigma: Option<f64>,
) -> Result<Generator> {
    let need = |name: &str| CliError::Config(format!("generator '{kind}' needs --{name}"));
    Ok(match kind {
        "constant" => Generator::Constant { value: value.ok_or_else(|| need("value"))? },
        "step" => Generator::Step,
        "power_cusp" => Generator::PowerCusp { beta: beta.ok_or_else(|| need("beta"))? },
        "log_singularity" => Generator::LogSingularity { center: center.unwrap_or(0.5), amplitude: amplitude.unwrap_or(1.0) },
        "random_signs" => Generator::RandomSigns { pieces: pieces.ok_or_else(|| need("pieces"))? },
        "random_uniform" => Generator::RandomUniform { pieces: pieces.ok_or_else(|| need("pieces"))? },
        "lognormal_weight" => Generator::LognormalWeight { sigma: sigma.ok_or_else(|| need("sigma"))? },
        _ => return Err(CliError::Config(format!("unknown generator kind '{kind}'"))),
    })
}
