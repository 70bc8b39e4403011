//! Suite configuration, loaded from TOML or JSON.

use std::path::{Path, PathBuf};

use campanato_core::FamilyPolicy;
use serde::{Deserialize, Serialize};

use crate::checks;
use crate::error::{CliError, Result};

fn default_dimension() -> usize {
    1
}

fn default_grid_sizes() -> Vec<usize> {
    vec![64, 128]
}

fn default_family() -> FamilyPolicy {
    FamilyPolicy::Dyadic
}

fn default_samples() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Exponents {
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents { p: vec![1.0, 2.0], lambda: vec![0.0, 0.5], alpha: vec![0.25, 0.5], beta: vec![0.5, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative slack on inequalities that hold exactly.
    pub exact: f64,
    /// Minimum R² accepted for exponential decay fits.
    pub min_r2: f64,
    /// Largest factor by which a bounded statistic may move across one refinement.
    pub refinement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exact: 1e-10, min_r2: 0.9, refinement: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Cells per axis; every size must be a power of two.
    #[serde(default = "default_grid_sizes")]
    pub grid_sizes: Vec<usize>,
    #[serde(default = "default_family")]
    pub family: FamilyPolicy,
    #[serde(default)]
    pub exponents: Exponents,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Random functions drawn per randomized check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            checks: Vec::new(),
            dimension: default_dimension(),
            grid_sizes: default_grid_sizes(),
            family: default_family(),
            exponents: Exponents::default(),
            tolerances: Tolerances::default(),
            samples: default_samples(),
            seed: 0,
            output_dir: None,
        }
    }
}

impl SuiteConfig {
    /// Parse TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for tag in &self.checks {
            if checks::lookup(tag).is_none() {
                return Err(CliError::UnknownCheck(tag.clone()));
            }
        }
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(1..=2).contains(&self.dimension) {
            return bad(format!("dimension must be 1 or 2, got {}", self.dimension));
        }
        if self.grid_sizes.is_empty() {
            return bad("grid_sizes must not be empty".into());
        }
        if let Some(&r) = self.grid_sizes.iter().find(|&&r| r < 2 || !r.is_power_of_two()) {
            return bad(format!("grid sizes must be powers of two of at least 2, got {r}"));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        let e = &self.exponents;
        let n = self.dimension as f64;
        if e.p.iter().any(|&p| !(p.is_finite() && p >= 1.0)) {
            return bad("exponents.p must be at least 1".into());
        }
        if e.lambda.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return bad("exponents.lambda must be non-negative".into());
        }
        if e.alpha.iter().any(|&a| !(a.is_finite() && (0.0..n).contains(&a))) {
            return bad(format!("exponents.alpha must lie in [0, {n})"));
        }
        if e.beta.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return bad("exponents.beta must lie in (0, 1]".into());
        }
        let t = &self.tolerances;
        if !(t.exact >= 0.0 && (0.0..=1.0).contains(&t.min_r2) && t.refinement >= 1.0) {
            return bad("tolerances out of range".into());
        }
        Ok(())
    }

    pub fn sorted_sizes(&self) -> Vec<usize> {
        let mut s = self.grid_sizes.clone();
        s.sort_unstable();
        s.dedup();
        s
    }
}
