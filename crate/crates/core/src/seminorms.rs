//! Seminorm functionals indexed by oscillation kind, exponent, scale and normalization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{cube_stats, pow_abs, Cube, CubeFamily, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormKind {
    /// `|f|^p`
    Morrey,
    /// `|f − f_Q|^p`
    Campanato,
    /// `|f − |f|_Q|^p`
    Barred,
    /// `|f + |f|_Q|^p`
    Tilde,
    /// `||f| − f_Q|^p`
    AbsMinusMean,
    /// `||f| + f_Q|^p`
    AbsPlusMean,
    /// `min_{c ≥ 0} |f − c|^p`
    InfNonneg,
    /// `min_{c ≤ 0} |f − c|^p`
    InfNonpos,
}

impl SeminormKind {
    pub const ALL: [SeminormKind; 8] = [
        SeminormKind::Morrey,
        SeminormKind::Campanato,
        SeminormKind::Barred,
        SeminormKind::Tilde,
        SeminormKind::AbsMinusMean,
        SeminormKind::AbsPlusMean,
        SeminormKind::InfNonneg,
        SeminormKind::InfNonpos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeminormKind::Morrey => "morrey",
            SeminormKind::Campanato => "campanato",
            SeminormKind::Barred => "barred",
            SeminormKind::Tilde => "tilde",
            SeminormKind::AbsMinusMean => "abs_minus_mean",
            SeminormKind::AbsPlusMean => "abs_plus_mean",
            SeminormKind::InfNonneg => "inf_nonneg",
            SeminormKind::InfNonpos => "inf_nonpos",
        }
    }
}

impl std::str::FromStr for SeminormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeminormKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown seminorm kind '{s}'")))
    }
}

/// Cube normalizer: `ρ^{−λ}` or `|Q ∩ Ω|^{−λ/n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Radius,
    Volume,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radius" => Ok(Normalization::Radius),
            "volume" => Ok(Normalization::Volume),
            _ => Err(invalid(format!("unknown normalization '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormSpec {
    pub kind: SeminormKind,
    pub p: f64,
    pub lambda: f64,
    pub normalization: Normalization,
}

impl SeminormSpec {
    pub fn new(kind: SeminormKind, p: f64, lambda: f64, normalization: Normalization) -> Result<Self> {
        let spec = SeminormSpec {
            kind,
            p,
            lambda,
            normalization,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `λ = n` with volume normalization: plain cube averages.
    pub fn averaged(kind: SeminormKind, p: f64, dim: usize) -> Result<Self> {
        Self::new(kind, p, dim as f64, Normalization::Volume)
    }

    /// The BMO seminorm: mean oscillation `|f − f_Q|` averaged over cubes.
    pub fn bmo(dim: usize) -> Self {
        SeminormSpec {
            kind: SeminormKind::Campanato,
            p: 1.0,
            lambda: dim as f64,
            normalization: Normalization::Volume,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(invalid(format!("p must be positive, got {}", self.p)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        Ok(())
    }

    fn normalizer(&self, cube: &Cube, dim: usize) -> f64 {
        if self.lambda == 0.0 {
            return 1.0;
        }
        match self.normalization {
            Normalization::Radius => cube.rho().powf(-self.lambda),
            Normalization::Volume => cube.measure().powf(-self.lambda / dim as f64),
        }
    }
}

/// Normalized integral of the kind's integrand over one cube (0 on empty cubes).
pub fn cube_value(f: &GridFunction, cube: &Cube, spec: &SeminormSpec) -> Result<f64> {
    if cube.is_empty() {
        return Ok(0.0);
    }
    let p = spec.p;
    let mean_integrand = match spec.kind {
        SeminormKind::InfNonneg | SeminormKind::InfNonpos => {
            let constraint = if spec.kind == SeminormKind::InfNonneg {
                Constraint::Nonneg
            } else {
                Constraint::Nonpos
            };
            let xs: Vec<f64> = f.domain().cells(cube).map(|c| f.value(c)).collect();
            let c = minimizer(&xs, p, constraint);
            objective(&xs, c, p) / xs.len() as f64
        }
        SeminormKind::Morrey => {
            f.domain().cells(cube).map(|c| pow_abs(f.value(c), p)).sum::<f64>() / cube.active_count() as f64
        }
        kind => {
            let s = cube_stats(f, cube, p)?;
            match kind {
                SeminormKind::Campanato => s.campanato,
                SeminormKind::Barred => s.barred,
                SeminormKind::Tilde => s.tilde,
                SeminormKind::AbsMinusMean => s.abs_minus_mean,
                SeminormKind::AbsPlusMean => s.abs_plus_mean,
                _ => unreachable!(),
            }
        }
    };
    Ok(spec.normalizer(cube, f.domain().dim()) * mean_integrand * cube.measure())
}

#[derive(Debug, Clone)]
pub struct SeminormReport {
    pub spec: SeminormSpec,
    /// Normalized values, one per family cube (p-th power scale).
    pub values: Vec<f64>,
    pub sup: f64,
    /// Position of the first cube attaining `sup`.
    pub index: Option<usize>,
    pub cube: Option<Cube>,
    /// `sup^{1/p}`.
    pub root: f64,
}

impl SeminormReport {
    pub fn to_json(&self, per_cube: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "spec": self.spec,
            "sup": self.sup,
            "root": self.root,
            "index": self.index,
            "cube": self.cube,
        });
        if per_cube {
            v["values"] = serde_json::json!(self.values);
        }
        v
    }
}

pub fn seminorm(f: &GridFunction, spec: &SeminormSpec, family: &CubeFamily) -> Result<SeminormReport> {
    spec.validate()?;
    if family.is_empty() {
        return Err(invalid("cube family is empty"));
    }
    let values = family
        .cubes()
        .par_iter()
        .map(|q| cube_value(f, q, spec))
        .collect::<Result<Vec<f64>>>()?;
    let mut index = None;
    let mut sup = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if index.is_none() || v > sup {
            sup = v;
            index = Some(i);
        }
    }
    Ok(SeminormReport {
        spec: *spec,
        sup,
        cube: index.map(|i| family.cubes()[i].clone()),
        index,
        root: sup.powf(1.0 / spec.p),
        values,
    })
}

/// Admissible set for the constant in `min_c Σ|f − c|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Free,
    Nonneg,
    Nonpos,
}

impl Constraint {
    fn project(self, c: f64) -> f64 {
        match self {
            Constraint::Free => c,
            Constraint::Nonneg => c.max(0.0),
            Constraint::Nonpos => c.min(0.0),
        }
    }
}

fn objective(xs: &[f64], c: f64, p: f64) -> f64 {
    xs.iter().map(|&x| pow_abs(x - c, p)).sum()
}

fn minimizer(xs: &[f64], p: f64, constraint: Constraint) -> f64 {
    if p == 1.0 {
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        let m = s.len();
        let med = if m % 2 == 1 { s[m / 2] } else { 0.5 * (s[m / 2 - 1] + s[m / 2]) };
        return constraint.project(med);
    }
    if p == 2.0 {
        return constraint.project(xs.iter().sum::<f64>() / xs.len() as f64);
    }
    if p < 1.0 {
        // concave between consecutive samples: the minimum sits on a sample
        // value or on the constraint boundary
        let mut best = (f64::INFINITY, 0.0);
        let boundary = if constraint == Constraint::Free { None } else { Some(0.0) };
        for c in xs.iter().map(|&x| constraint.project(x)).chain(boundary) {
            let v = objective(xs, c, p);
            if v < best.0 {
                best = (v, c);
            }
        }
        return best.1;
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (constraint.project(lo), constraint.project(hi));
    golden_section(|c| objective(xs, c, p), lo, hi)
}

fn golden_section(obj: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let tol = 1e-13 * (1.0 + a.abs().max(b.abs()));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj(d);
        }
    }
    let mid = 0.5 * (a + b);
    // endpoints can win when the bracket collapsed onto the boundary
    [a, mid, b].into_iter().min_by(|x, y| obj(*x).total_cmp(&obj(*y))).unwrap()
}

/// A global minimizer of `c ↦ Σ_{x∈Q∩Ω} |f(x) − c|^p` over the constraint set.
pub fn minimizing_constant(f: &GridFunction, cube: &Cube, p: f64, constraint: Constraint) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(invalid(format!("p must be positive, got {p}")));
    }
    if cube.is_empty() {
        return Err(Error::DisjointCube);
    }
    let xs: Vec<f64> = f.domain().cells(cube).map(|c| f.value(c)).collect();
    Ok(minimizer(&xs, p, constraint))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub value: f64,
    /// False when only a dyadic-offset subset of pairs was scanned.
    pub exact: bool,
}

/// `sup_{x≠y} |f(x) − f(y)| / |x − y|^β` over cell centers.
pub fn holder_seminorm(f: &GridFunction, beta: f64) -> Result<HolderEstimate> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1], got {beta}")));
    }
    let dom = f.domain();
    let cells = dom.active_cells();
    if cells.len() < 2 {
        return Err(invalid("Hölder seminorm needs at least two active cells"));
    }
    let exact = if dom.dim() == 1 { dom.res() <= 4096 } else { dom.res() <= 64 };
    let ratio = |a: usize, b: usize| (f.value(a) - f.value(b)).abs() / dom.center_distance(a, b).powf(beta);
    let value = if exact {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &a)| cells[i + 1..].iter().map(|&b| ratio(a, b)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    } else {
        let res = dom.res() as i64;
        let mut offsets = Vec::new();
        let mut k = 1i64;
        while k < res {
            offsets.push([k, 0]);
            if dom.dim() == 2 {
                offsets.push([0, k]);
                offsets.push([k, k]);
                offsets.push([k, -k]);
            }
            k *= 2;
        }
        cells
            .par_iter()
            .map(|&a| {
                let ia = dom.multi_index(a);
                let mut m = 0.0f64;
                for off in &offsets {
                    let j0 = ia[0] as i64 + off[0];
                    let j1 = ia[1] as i64 + off[1];
                    if j0 < 0 || j1 < 0 || j0 >= res || (dom.dim() == 2 && j1 >= res) {
                        continue;
                    }
                    let b = dom.linear([j0 as usize, j1 as usize]);
                    if dom.is_active(b) {
                        m = m.max(ratio(a, b));
                    }
                }
                m
            })
            .reduce(|| 0.0, f64::max)
    };
    Ok(HolderEstimate { value, exact })
}

/// Ratio of the `p`-th-root values `a / b`, with `0/0 = 1` and `x/0 = ∞`.
pub fn variant_equivalence_ratio(a: &SeminormReport, b: &SeminormReport) -> f64 {
    ratio_or_sentinel(a.root, b.root)
}

pub(crate) fn ratio_or_sentinel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}
