//! Muckenhoupt constants, reverse Hölder and measure-comparison diagnostics,
//! the Rubio de Francia iteration and the weighted characterization statistic.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{pow_abs, Cube, CubeFamily, GridFunction};
use crate::maximal::{deviations, global_maximal, CharStatistic, CompetitorPolicy};

/// A strictly positive grid function.
#[derive(Debug, Clone)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(w: GridFunction) -> Result<Self> {
        let dom = w.domain();
        if let Some(&c) = dom.active_cells().iter().find(|&&c| w.value(c) <= 0.0) {
            return Err(Error::NonPositiveWeight { cell: c, value: w.value(c) });
        }
        Ok(Weight(w))
    }

    pub fn function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_inner(self) -> GridFunction {
        self.0
    }

    /// `avg_Q ω^r`.
    pub fn power_mean(&self, cube: &Cube, r: f64) -> f64 {
        let dom = self.0.domain();
        dom.cells(cube).map(|c| self.0.value(c).powf(r)).sum::<f64>() / cube.active_count() as f64
    }

    fn inv_max(&self, cube: &Cube) -> f64 {
        self.0.domain().cells(cube).map(|c| 1.0 / self.0.value(c)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum WeightClass {
    A1,
    Ap { p: f64 },
    Apq { p: f64, q: f64 },
}

impl WeightClass {
    fn validate(&self) -> Result<()> {
        match *self {
            WeightClass::A1 => Ok(()),
            WeightClass::Ap { p } if p.is_finite() && p > 1.0 => Ok(()),
            WeightClass::Apq { p, q } if p >= 1.0 && q >= p && q.is_finite() => Ok(()),
            other => Err(invalid(format!("invalid weight class exponents {other:?}"))),
        }
    }

    fn cube_value(&self, w: &Weight, q: &Cube) -> f64 {
        match *self {
            WeightClass::A1 => w.power_mean(q, 1.0) * w.inv_max(q),
            WeightClass::Ap { p } => w.power_mean(q, 1.0) * w.power_mean(q, -1.0 / (p - 1.0)).powf(p - 1.0),
            WeightClass::Apq { p, q: qq } => {
                let left = w.power_mean(q, qq).powf(1.0 / qq);
                let right = if p == 1.0 {
                    w.inv_max(q)
                } else {
                    let pp = p / (p - 1.0);
                    w.power_mean(q, -pp).powf(1.0 / pp)
                };
                left * right
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonExponents {
    pub epsilon: f64,
    pub l: f64,
    pub c: f64,
    /// Number of (subset, cube) pairs examined.
    pub pairs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightReport {
    #[serde(flatten)]
    pub class: WeightClass,
    pub constant: f64,
    pub cube: Option<Cube>,
    #[serde(skip)]
    pub index: Option<usize>,
    #[serde(skip)]
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reverse_holder: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonExponents>,
}

/// Supremum over the family of the defining product of the class.
pub fn muckenhoupt_constant(w: &Weight, class: WeightClass, family: &CubeFamily) -> Result<WeightReport> {
    class.validate()?;
    if family.is_empty() {
        return Err(invalid("cube family is empty"));
    }
    let values: Vec<f64> = family
        .cubes()
        .par_iter()
        .map(|q| if q.is_empty() { 0.0 } else { class.cube_value(w, q) })
        .collect();
    let mut index = None;
    let mut constant = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if index.is_none() || v > constant {
            constant = v;
            index = Some(i);
        }
    }
    Ok(WeightReport {
        class,
        constant,
        cube: index.map(|i| family.cubes()[i].clone()),
        index,
        values,
        reverse_holder: None,
        comparison: None,
    })
}

/// Largest grid exponent `q` with `(avg_Q ω^q)^{1/q} ≤ C·avg_Q ω` on every cube; `None` if none qualifies.
pub fn reverse_holder_exponent(w: &Weight, family: &CubeFamily, c: f64, q_grid: &[f64]) -> Result<Option<f64>> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(invalid(format!("constant must be at least 1, got {c}")));
    }
    if q_grid.iter().any(|&q| !(q.is_finite() && q > 1.0)) {
        return Err(invalid("reverse Hölder exponents must exceed 1"));
    }
    let cubes: Vec<&Cube> = family.iter().filter(|q| !q.is_empty()).collect();
    let holds = |q: f64| {
        cubes.par_iter().all(|cube| {
            let lhs = w.power_mean(cube, q).powf(1.0 / q);
            lhs <= c * w.power_mean(cube, 1.0) * (1.0 + 1e-12)
        })
    };
    Ok(q_grid.iter().copied().filter(|&q| holds(q)).fold(None, |best: Option<f64>, q| {
        Some(best.map_or(q, |b| b.max(q)))
    }))
}

/// Random cell subsets drawn per cube.
pub const RANDOM_SUBSETS: usize = 64;

/// Envelope exponents `ε ≤ v/u ≤ L` with `u = −ln(|S|/|Q|)`, `v = −ln(ω(S)/ω(Q))`, `C = 1`.
///
/// Subsets of each cube are its dyadic sub-cubes, [`RANDOM_SUBSETS`] seeded
/// random cell subsets, and the prefixes of its cells sorted by weight. The
/// sorted prefixes realize the extreme `ω(S)` at every subset size, so the
/// envelope is the one over all cell subsets. Single-cell cubes are skipped.
pub fn measure_comparison(w: &Weight, family: &CubeFamily, seed: u64) -> Result<ComparisonExponents> {
    let dom = w.function().domain();
    let per: Vec<(f64, f64, usize)> = family
        .cubes()
        .par_iter()
        .enumerate()
        .filter(|(_, q)| q.active_count() >= 2)
        .map(|(k, q)| {
            let cells: Vec<usize> = dom.cells(q).collect();
            let ws: Vec<f64> = cells.iter().map(|&c| w.function().value(c)).collect();
            let m = ws.len();
            let total: f64 = ws.iter().sum();
            let mut acc = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
            let mut push = |size: usize, mass: f64| {
                let u = -(size as f64 / m as f64).ln();
                let v = -(mass / total).ln();
                acc.0 = acc.0.min(v / u);
                acc.1 = acc.1.max(v / u);
                acc.2 += 1;
            };

            let mut side = q.len() / 2;
            while side >= 1 {
                let per_axis = q.len() / side;
                let o = q.origin();
                let second = if dom.dim() == 2 { per_axis } else { 1 };
                for a in 0..per_axis {
                    for b in 0..second {
                        let origin = [o[0] + (a * side) as i64, o[1] + (b * side) as i64];
                        if let Ok(sub) = dom.cube(origin, side) {
                            if !sub.is_empty() && sub.active_count() < m && q.contains(&sub) {
                                let mass: f64 = dom.cells(&sub).map(|c| w.function().value(c)).sum();
                                push(sub.active_count(), mass);
                            }
                        }
                    }
                }
                side /= 2;
            }

            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for _ in 0..RANDOM_SUBSETS {
                let size = rng.random_range(1..m);
                let mass: f64 = sample(&mut rng, m, size).iter().map(|i| ws[i]).sum();
                push(size, mass);
            }

            let mut sorted = ws.clone();
            sorted.sort_by(f64::total_cmp);
            let (mut low, mut high) = (0.0, 0.0);
            for size in 1..m {
                low += sorted[size - 1];
                high += sorted[m - size];
                push(size, low);
                push(size, high);
            }
            acc
        })
        .collect();
    if per.is_empty() {
        return Err(invalid("no cube with at least two active cells"));
    }
    let epsilon = per.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let l = per.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonExponents {
        epsilon,
        l,
        c: 1.0,
        pairs: per.iter().map(|a| a.2).sum(),
    })
}

#[derive(Debug, Clone)]
pub struct RubioDeFrancia {
    /// `Σ_{k=0..K} M^k g / (2B)^k`
    pub r: GridFunction,
    pub b: f64,
    pub k: usize,
    /// `2‖M^K g‖_∞ / (2B)^K`
    pub tail: f64,
    /// `‖M g‖_∞ / ‖g‖_∞` (0 for `g ≡ 0`).
    pub observed_ratio: f64,
}

impl RubioDeFrancia {
    pub fn weight(&self) -> Result<Weight> {
        Weight::new(self.r.clone())
    }
}

/// Truncated Rubio de Francia iteration with the global maximal operator over `family`.
pub fn rubio_de_francia(g: &GridFunction, b: f64, k: usize, family: &CubeFamily) -> Result<RubioDeFrancia> {
    if k < 1 {
        return Err(invalid("truncation depth must be at least 1"));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(invalid(format!("B must be positive, got {b}")));
    }
    let mut term = g.abs();
    let g_sup = term.max_abs();
    let mut r = term.clone();
    let mut observed_ratio = 0.0;
    for step in 1..=k {
        term = global_maximal(&term, family, 0.0)?;
        if step == 1 {
            observed_ratio = if g_sup > 0.0 { term.max_abs() / g_sup } else { 0.0 };
            if b < observed_ratio * (1.0 - 1e-12) {
                return Err(Error::BoundTooSmall { b, observed: observed_ratio });
            }
        }
        let scale = (2.0 * b).powi(-(step as i32));
        r = r.zip_map(&term, |acc, t| acc + scale * t)?;
    }
    Ok(RubioDeFrancia {
        r,
        b,
        k,
        tail: 2.0 * term.max_abs() * (2.0 * b).powi(-(k as i32)),
        observed_ratio,
    })
}

/// `sup_Q |Q|^{α/n} (∫_Q |b − |Q|^{−α/n} M_{α,Q} b|^q ω^q)^{1/q} / (∫_Q ω^p)^{1/p}`,
/// requiring `1/p − 1/q = α/n`.
pub fn weighted_char_statistic(
    b: &GridFunction,
    w: &Weight,
    p: f64,
    q: f64,
    alpha: f64,
    family: &CubeFamily,
) -> Result<CharStatistic> {
    b.check_same(w.function())?;
    let dom = b.domain();
    let n = dom.dim() as f64;
    if !(p >= 1.0 && q >= p && q.is_finite()) {
        return Err(invalid(format!("need 1 ≤ p ≤ q < ∞, got p={p}, q={q}")));
    }
    if ((1.0 / p - 1.0 / q) - alpha / n).abs() > 1e-12 {
        return Err(invalid(format!("exponents violate 1/p − 1/q = α/n (p={p}, q={q}, α={alpha})")));
    }
    if family.is_empty() {
        return Err(invalid("cube family is empty"));
    }
    let sums = crate::grid::BoxSums::new(dom, |c| b.value(c).abs());
    let vol = dom.cell_volume();
    let per: Vec<(f64, bool)> = family
        .cubes()
        .par_iter()
        .map(|cube| {
            if cube.is_empty() {
                return (0.0, true);
            }
            let (dev, exact) = deviations(b, &sums, cube, alpha, CompetitorPolicy::Auto);
            let num: f64 = dev.iter().map(|&(c, d)| pow_abs(d, q) * w.function().value(c).powf(q)).sum::<f64>() * vol;
            let den: f64 = dev.iter().map(|&(c, _)| w.function().value(c).powf(p)).sum::<f64>() * vol;
            let lead = if alpha == 0.0 { 1.0 } else { cube.measure().powf(alpha / n) };
            (lead * num.powf(1.0 / q) / den.powf(1.0 / p), exact)
        })
        .collect();
    let exact = per.iter().all(|&(_, e)| e);
    let values = per.into_iter().map(|(v, _)| v).collect();
    Ok(CharStatistic::from_values(p, q, alpha, 0.0, values, exact, family))
}
