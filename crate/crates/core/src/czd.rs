//! Calderón–Zygmund stopping-time selection, iterated John–Nirenberg
//! generations, distribution functions and exponential tail fits.
//!
//! The stopping level is called `tau` to keep `alpha` free for fractional
//! orders.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{enumerate_cubes, pow_abs, Cube, Domain, FamilyPolicy, GridFunction};
use crate::seminorms::{seminorm, SeminormKind, SeminormSpec};

/// Level used when none is given (the choice `s = e` of the exponential-integrability argument).
pub const DEFAULT_TAU: f64 = std::f64::consts::E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedCube {
    pub cube: Cube,
    /// Average of the driving function over the cube.
    pub average: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CZDecomposition {
    pub base: Cube,
    pub tau: f64,
    /// Maximal dyadic cubes with average above `tau`, ordered by origin.
    pub selected: Vec<SelectedCube>,
    /// Full-grid flags for active cells of the base cube outside every selected cube.
    #[serde(skip)]
    pub good: Vec<bool>,
}

impl CZDecomposition {
    pub fn selected_measure(&self) -> f64 {
        self.selected.iter().map(|s| s.cube.measure()).fold(0.0, |a, m| a + m)
    }
}

fn check_dyadic_base(dom: &Domain, q0: &Cube) -> Result<()> {
    if q0.is_clipped(dom.dim()) || (0..dom.dim()).any(|a| q0.origin()[a] < 0) {
        return Err(invalid("base cube must lie inside the domain"));
    }
    if !q0.len().is_power_of_two() {
        return Err(invalid(format!("base cube side must be a power of two, got {}", q0.len())));
    }
    if q0.is_empty() {
        return Err(Error::DisjointCube);
    }
    Ok(())
}

fn children(dom: &Domain, q: &Cube) -> Vec<Cube> {
    let h = (q.len() / 2) as i64;
    let o = q.origin();
    let offs: &[[i64; 2]] = if dom.dim() == 2 {
        &[[0, 0], [0, 1], [1, 0], [1, 1]]
    } else {
        &[[0, 0], [1, 0]]
    };
    offs.iter()
        .map(|d| {
            dom.cube([o[0] + d[0] * h, o[1] + d[1] * h], h as usize)
                .expect("child of an in-domain cube")
        })
        .collect()
}

/// Stopping-time selection on full-grid driving values (no sign or level checks).
fn select(dom: &Domain, drive: &[f64], q0: &Cube, tau: f64, good: &mut [bool]) -> Vec<SelectedCube> {
    let avg = |q: &Cube| dom.cells(q).map(|c| drive[c]).sum::<f64>() / q.active_count() as f64;
    let mut out = Vec::new();
    let mut stack = vec![q0.clone()];
    while let Some(q) = stack.pop() {
        if q.len() == 1 {
            continue;
        }
        // reversed so the first child is processed first
        for child in children(dom, &q).into_iter().rev() {
            if child.is_empty() {
                continue;
            }
            let a = avg(&child);
            if a > tau {
                for c in dom.cells(&child) {
                    good[c] = false;
                }
                out.push((child, a));
            } else {
                stack.push(child);
            }
        }
    }
    out.sort_by(|a, b| {
        let (la, _) = a.0.ranges();
        let (lb, _) = b.0.ranges();
        la.cmp(&lb)
    });
    out.into_iter().map(|(cube, average)| SelectedCube { cube, average }).collect()
}

/// Maximal dyadic subcubes of `q0` on which the average of `g` exceeds `tau`.
pub fn cz_decompose(g: &GridFunction, q0: &Cube, tau: f64) -> Result<CZDecomposition> {
    let dom = g.domain();
    check_dyadic_base(dom, q0)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("level must be positive, got {tau}")));
    }
    if let Some(c) = dom.cells(q0).find(|&c| g.value(c) < 0.0) {
        return Err(Error::Negative { cell: c, value: g.value(c) });
    }
    let average = g.mean_over(q0)?;
    if average > tau {
        return Err(Error::LevelTooLow { average, level: tau });
    }
    let mut good = vec![false; dom.cell_count()];
    for c in dom.cells(q0) {
        good[c] = true;
    }
    let selected = select(dom, g.values(), q0, tau, &mut good);
    Ok(CZDecomposition {
        base: q0.clone(),
        tau,
        selected,
        good,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationCube {
    pub cube: Cube,
    /// Average of the driving function `|f − |f|_R|^p` over the cube.
    pub average: f64,
    /// `|f|_Q`, the reference constant for the next generation.
    pub reference: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generation {
    pub cubes: Vec<GenerationCube>,
    pub measure: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JNGenerations {
    pub base: Cube,
    pub p: f64,
    pub tau: f64,
    /// Barred seminorm `s` over the dyadic cubes of the base (p-th power scale).
    pub seminorm: f64,
    pub depth: usize,
    pub generations: Vec<Generation>,
    /// `s = 0`: the function is a non-negative constant on the base cube.
    pub degenerate: bool,
}

/// Outcome of the pointwise bound `|f − |f|_{Q₀}|^p ≤ i·2^{n+k}·τ·s` off generation `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffGenerationBound {
    pub generation: usize,
    /// Largest `|f − |f|_{Q₀}|^p / s` over cells outside generation `i`.
    pub observed: f64,
    /// `i·2^{n+1}·τ`
    pub tight: f64,
    /// `i·2^{n+2}·τ`
    pub weak: f64,
    pub tight_holds: bool,
    pub weak_holds: bool,
}

impl JNGenerations {
    /// `|Q₀|·τ^{−i}` for generation `i` (1-based).
    pub fn measure_bound(&self, i: usize) -> f64 {
        self.base.measure() * self.tau.powi(-(i as i32))
    }

    pub fn measure_decay_holds(&self, rel_tol: f64) -> bool {
        self.generations
            .iter()
            .enumerate()
            .all(|(k, g)| g.measure <= self.measure_bound(k + 1) * (1.0 + rel_tol))
    }

    /// Evaluate the off-generation bound for every computed generation.
    pub fn off_generation_bounds(&self, f: &GridFunction) -> Result<Vec<OffGenerationBound>> {
        let dom = f.domain();
        let n = dom.dim() as i32;
        let r0 = f.abs_mean_over(&self.base)?;
        let mut out = Vec::new();
        for (k, g) in self.generations.iter().enumerate() {
            let i = (k + 1) as f64;
            let mut inside = vec![false; dom.cell_count()];
            for gc in &g.cubes {
                for c in dom.cells(&gc.cube) {
                    inside[c] = true;
                }
            }
            let observed = if self.degenerate {
                0.0
            } else {
                dom.cells(&self.base)
                    .filter(|&c| !inside[c])
                    .map(|c| pow_abs(f.value(c) - r0, self.p) / self.seminorm)
                    .fold(0.0, f64::max)
            };
            let tight = i * 2f64.powi(n + 1) * self.tau;
            let weak = i * 2f64.powi(n + 2) * self.tau;
            let slack = 1e-12 * tight;
            out.push(OffGenerationBound {
                generation: k + 1,
                observed,
                tight,
                weak,
                tight_holds: observed <= tight + slack,
                weak_holds: observed <= weak + slack,
            });
        }
        Ok(out)
    }
}

/// Iterated decomposition of `|f − |f|_R|^p` at level `τ·s`, starting from `R = Q₀`.
pub fn jn_generations(f: &GridFunction, q0: &Cube, p: f64, tau: f64, depth: usize) -> Result<JNGenerations> {
    let dom = f.domain();
    check_dyadic_base(dom, q0)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("p must lie in (0, 1], got {p}")));
    }
    if !(tau.is_finite() && tau > 1.0) {
        return Err(invalid(format!("level must exceed 1, got {tau}")));
    }
    if depth == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    let family = enumerate_cubes(dom, &FamilyPolicy::Dyadic, Some(q0))?;
    let spec = SeminormSpec::averaged(SeminormKind::Barred, p, dom.dim())?;
    let s = seminorm(f, &spec, &family)?.sup;
    let mut result = JNGenerations {
        base: q0.clone(),
        p,
        tau,
        seminorm: s,
        depth,
        generations: Vec::with_capacity(depth),
        degenerate: s == 0.0,
    };
    if result.degenerate {
        result.generations = (0..depth).map(|_| Generation { cubes: vec![], measure: 0.0 }).collect();
        return Ok(result);
    }
    let level = tau * s;
    let mut parents = vec![(q0.clone(), f.abs_mean_over(q0)?)];
    let mut drive = vec![0.0; dom.cell_count()];
    let mut good = vec![true; dom.cell_count()];
    for _ in 0..depth {
        let mut cubes = Vec::new();
        for (r, reference) in &parents {
            for c in dom.cells(r) {
                drive[c] = pow_abs(f.value(c) - reference, p);
            }
            for sel in select(dom, &drive, r, level, &mut good) {
                let reference = f.abs_mean_over(&sel.cube)?;
                cubes.push(GenerationCube {
                    cube: sel.cube,
                    average: sel.average,
                    reference,
                });
            }
        }
        let measure = cubes.iter().map(|g| g.cube.measure()).fold(0.0, |a, m| a + m);
        parents = cubes.iter().map(|g| (g.cube.clone(), g.reference)).collect();
        result.generations.push(Generation { cubes, measure });
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub thresholds: Vec<f64>,
    /// `|{x ∈ region : |g(x)| > t}| / |region|` per threshold.
    pub fractions: Vec<f64>,
}

/// Exact distribution function of `|g|` over the active part of `region`.
pub fn distribution(g: &GridFunction, region: &Cube, thresholds: &[f64]) -> Result<DecayProfile> {
    if region.is_empty() {
        return Err(Error::DisjointCube);
    }
    if thresholds.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("thresholds must be non-negative and strictly increasing"));
    }
    let mut vals: Vec<f64> = g.domain().cells(region).map(|c| g.value(c).abs()).collect();
    vals.sort_by(f64::total_cmp);
    let m = vals.len() as f64;
    let fractions = thresholds
        .iter()
        .map(|&t| (vals.len() - vals.partition_point(|&v| v <= t)) as f64 / m)
        .collect();
    Ok(DecayProfile {
        thresholds: thresholds.to_vec(),
        fractions,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// 32 log-spaced thresholds between the 50th and 99.5th percentiles of `|g|` on `region`.
pub fn default_thresholds(g: &GridFunction, region: &Cube) -> Result<Vec<f64>> {
    const POINTS: usize = 32;
    if region.is_empty() {
        return Err(Error::DisjointCube);
    }
    let mut vals: Vec<f64> = g.domain().cells(region).map(|c| g.value(c).abs()).collect();
    vals.sort_by(f64::total_cmp);
    let hi = percentile(&vals, 0.995);
    if hi <= 0.0 {
        return Err(invalid("distribution has no positive mass to threshold"));
    }
    let mut lo = percentile(&vals, 0.5);
    if lo <= 0.0 {
        lo = vals.iter().copied().find(|&v| v > 0.0).unwrap_or(hi).min(hi);
    }
    if hi <= lo {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..POINTS)
        .map(|k| (a + (b - a) * k as f64 / (POINTS - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c1: f64,
    pub c2: f64,
    pub r2: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: usize,
}

impl DecayFit {
    pub fn is_decaying(&self) -> bool {
        self.c2 > 0.0
    }
}

/// Least-squares line through `(t, ln μ)` over the positive fractions in `[t_lo, t_hi]`.
pub fn fit_exponential_decay(profile: &DecayProfile, t_lo: f64, t_hi: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = profile
        .thresholds
        .iter()
        .zip(&profile.fractions)
        .filter(|&(&t, &m)| t >= t_lo && t <= t_hi && m > 0.0)
        .map(|(&t, &m)| (t, m.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::FitFailure(pts.len()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit range holds a single distinct threshold"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy == 0.0 || ss_res <= 1e-28 * k { 1.0 } else { 1.0 - ss_res / syy };
    Ok(DecayFit {
        c1: intercept.exp(),
        c2: -slope,
        r2,
        t_lo: pts[0].0,
        t_hi: pts[pts.len() - 1].0,
        points: pts.len(),
    })
}
