//! Uniform grids over box domains, discrete cubes and per-cube statistics.
//!
//! A [`Domain`] is a cube `[lower, lower + side]^n` (n = 1 or 2) split into
//! `res^n` equal cells, optionally restricted by a boolean mask. Functions are
//! step functions: one sample per active cell, integrated with the midpoint
//! rule (sample times cell volume).
//!
//! Cells are addressed by a linear index in row-major order: for n = 2 the
//! cell `(i, j)` (axis 0 first) has index `i * res + j`.
//!
//! A [`Cube`] is a set of whole cells. It keeps its unclipped placement
//! (origin cell and side in cells, from which the half-side `rho` is derived)
//! together with the index ranges left after clipping to the domain, so that
//! `rho` always refers to the ambient cube while integrals run over the
//! clipped part only.

use std::cmp::Reverse;
use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `|x|^p` with the common exponents special-cased.
#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    dim: usize,
    lower: [f64; 2],
    side: f64,
    res: usize,
    mask: Option<Vec<bool>>,
    active: Vec<usize>,
}

impl Domain {
    /// Full box `[0, side]^dim` with `res` cells per axis.
    pub fn new(dim: usize, side: f64, res: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidDomain(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidDomain(format!("side must be positive, got {side}")));
        }
        if res == 0 {
            return Err(Error::InvalidDomain("resolution must be at least 1".into()));
        }
        let cells = res.pow(dim as u32);
        Ok(Domain {
            dim,
            lower: [0.0; 2],
            side,
            res,
            mask: None,
            active: (0..cells).collect(),
        })
    }

    /// Unit box `[0, 1]^dim`.
    pub fn unit(dim: usize, res: usize) -> Result<Self> {
        Self::new(dim, 1.0, res)
    }

    pub fn with_lower(mut self, lower: &[f64]) -> Result<Self> {
        if lower.len() != self.dim || lower.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "lower corner needs {} finite coordinates",
                self.dim
            )));
        }
        self.lower[..self.dim].copy_from_slice(lower);
        Ok(self)
    }

    /// Restrict to the active subdomain selected by `mask` (one flag per cell).
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.cell_count() {
            return Err(Error::SampleCount {
                expected: self.cell_count(),
                actual: mask.len(),
            });
        }
        let active: Vec<usize> = (0..mask.len()).filter(|&c| mask[c]).collect();
        if active.is_empty() {
            return Err(Error::EmptyDomain);
        }
        self.active = active;
        self.mask = if self.active.len() == mask.len() { None } else { Some(mask) };
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn cell_width(&self) -> f64 {
        self.side / self.res as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.dim as i32)
    }

    pub fn cell_count(&self) -> usize {
        self.res.pow(self.dim as u32)
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Linear indices of the active cells, increasing.
    pub fn active_cells(&self) -> &[usize] {
        &self.active
    }

    #[inline]
    pub fn is_active(&self, cell: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[cell])
    }

    /// Distance between consecutive cells along axis 0 in linear indexing.
    #[inline]
    pub(crate) fn stride(&self) -> usize {
        if self.dim == 2 {
            self.res
        } else {
            1
        }
    }

    #[inline]
    pub fn linear(&self, idx: [usize; 2]) -> usize {
        idx[0] * self.stride() + idx[1]
    }

    #[inline]
    pub fn multi_index(&self, cell: usize) -> [usize; 2] {
        if self.dim == 2 {
            [cell / self.res, cell % self.res]
        } else {
            [cell, 0]
        }
    }

    /// Continuous coordinates of a cell center (unused axes are 0).
    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let h = self.cell_width();
        let idx = self.multi_index(cell);
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = self.lower[a] + (idx[a] as f64 + 0.5) * h;
        }
        x
    }

    /// Euclidean distance between two cell centers.
    pub fn center_distance(&self, a: usize, b: usize) -> f64 {
        let (xa, xb) = (self.cell_center(a), self.cell_center(b));
        ((xa[0] - xb[0]).powi(2) + (xa[1] - xb[1]).powi(2)).sqrt()
    }

    /// Cube with lower cell `origin` and `len` cells per side, clipped to the
    /// domain. Cells outside the index box are dropped; masked cells stay in
    /// the ranges but do not count towards the measure.
    pub fn cube(&self, origin: [i64; 2], len: usize) -> Result<Cube> {
        if len == 0 {
            return Err(invalid("cube side must be at least one cell"));
        }
        let mut org = [0i64; 2];
        let mut lo = [0usize, 0];
        let mut hi = [1usize, 1];
        for a in 0..self.dim {
            org[a] = origin[a];
            let start = origin[a].max(0);
            let end = (origin[a] + len as i64).min(self.res as i64);
            if start >= end {
                return Err(Error::DisjointCube);
            }
            lo[a] = start as usize;
            hi[a] = end as usize;
        }
        let active = match &self.mask {
            None => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Some(m) => box_cells(self.stride(), lo, hi).filter(|&c| m[c]).count(),
        };
        Ok(Cube {
            origin: org,
            len,
            lo,
            hi,
            rho: len as f64 * self.cell_width() / 2.0,
            measure: active as f64 * self.cell_volume(),
            active,
        })
    }

    /// The whole index box as a cube.
    pub fn full_cube(&self) -> Cube {
        self.cube([0, 0], self.res).expect("full box is never disjoint")
    }

    /// Single-cell cube at a linear index.
    pub fn cell_cube(&self, cell: usize) -> Cube {
        let idx = self.multi_index(cell);
        self.cube([idx[0] as i64, idx[1] as i64], 1)
            .expect("cell index lies inside the domain")
    }

    /// Active cells of a cube, in row-major order.
    pub fn cells<'a>(&'a self, cube: &Cube) -> impl Iterator<Item = usize> + 'a {
        box_cells(self.stride(), cube.lo, cube.hi).filter(move |&c| self.is_active(c))
    }
}

fn box_cells(stride: usize, lo: [usize; 2], hi: [usize; 2]) -> impl Iterator<Item = usize> {
    (lo[0]..hi[0]).flat_map(move |i| (lo[1]..hi[1]).map(move |j| i * stride + j))
}

/// Axis-aligned discrete cube, clipped to its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    origin: [i64; 2],
    len: usize,
    lo: [usize; 2],
    hi: [usize; 2],
    rho: f64,
    measure: f64,
    active: usize,
}

impl Cube {
    /// Lower cell index of the unclipped cube.
    pub fn origin(&self) -> [i64; 2] {
        self.origin
    }

    /// Side length in cells of the unclipped cube.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Clipped index ranges `[lo, hi)` per axis (axis 1 is `0..1` in 1-D).
    pub fn ranges(&self) -> ([usize; 2], [usize; 2]) {
        (self.lo, self.hi)
    }

    /// Half of the continuous side of the unclipped cube.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `|Q ∩ Ω|` in real units.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    pub fn is_empty(&self) -> bool {
        self.active == 0
    }

    pub fn is_clipped(&self, dim: usize) -> bool {
        (0..dim).any(|a| self.hi[a] - self.lo[a] != self.len)
    }

    pub fn contains_index(&self, idx: [usize; 2]) -> bool {
        (0..2).all(|a| self.lo[a] <= idx[a] && idx[a] < self.hi[a])
    }

    /// Whether the clipped box of `other` lies inside the clipped box of `self`.
    pub fn contains(&self, other: &Cube) -> bool {
        (0..2).all(|a| self.lo[a] <= other.lo[a] && other.hi[a] <= self.hi[a])
    }

    pub fn intersects(&self, other: &Cube) -> bool {
        (0..2).all(|a| self.lo[a] < other.hi[a] && other.lo[a] < self.hi[a])
    }

    fn key(&self) -> (Reverse<usize>, [i64; 2]) {
        (Reverse(self.len), self.origin)
    }
}

/// How a [`CubeFamily`] is generated. Side lengths are in cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum FamilyPolicy {
    /// Full dyadic tree down to single cells; the window side must be a power of two.
    Dyadic,
    /// Every cell-aligned subcube of the window.
    Anchored,
    /// Cubes of the listed sides placed every `stride` cells (last position always included).
    Sliding { stride: usize, lengths: Vec<usize> },
    /// Cubes `Q(v, k·h)` centered at every grid vertex `v` with half-side `k` cells,
    /// clipped to the domain. Realizes `Ω(x₀, ρ)` near the boundary.
    Centered { half_sides: Vec<usize> },
}

/// The index set over which seminorm suprema are taken.
#[derive(Debug, Clone)]
pub struct CubeFamily {
    policy: Option<FamilyPolicy>,
    base: Option<Cube>,
    cubes: Vec<Cube>,
}

impl CubeFamily {
    /// Family from an explicit cube list; sorted and deduplicated.
    pub fn from_cubes(cubes: Vec<Cube>) -> Self {
        CubeFamily {
            policy: None,
            base: None,
            cubes: sort_dedup(cubes),
        }
    }

    /// Default index set: dyadic for 2-D grids or resolutions above 256
    /// (when the resolution is a power of two), anchored otherwise.
    pub fn default_for(domain: &Domain) -> Result<Self> {
        let policy = if (domain.dim() == 2 || domain.res() > 256) && domain.res().is_power_of_two() {
            FamilyPolicy::Dyadic
        } else {
            FamilyPolicy::Anchored
        };
        enumerate_cubes(domain, &policy, None)
    }

    pub fn policy(&self) -> Option<&FamilyPolicy> {
        self.policy.as_ref()
    }

    pub fn base(&self) -> Option<&Cube> {
        self.base.as_ref()
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cube> {
        self.cubes.iter()
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Union of two families (policy is dropped).
    pub fn union(&self, other: &CubeFamily) -> CubeFamily {
        let mut all = self.cubes.clone();
        all.extend(other.cubes.iter().cloned());
        CubeFamily::from_cubes(all)
    }

    /// First active cell not contained in any non-empty cube of the family.
    pub fn first_uncovered(&self, domain: &Domain) -> Option<usize> {
        let mut covered = vec![false; domain.cell_count()];
        for q in self.cubes.iter().filter(|q| !q.is_empty()) {
            for c in domain.cells(q) {
                covered[c] = true;
            }
        }
        domain.active_cells().iter().copied().find(|&c| !covered[c])
    }
}

fn sort_dedup(mut cubes: Vec<Cube>) -> Vec<Cube> {
    cubes.sort_by_key(Cube::key);
    let mut seen = HashSet::new();
    cubes.retain(|c| seen.insert((c.origin, c.len)));
    cubes
}

/// Generate the cube family for `policy`, restricted to `base` when given.
///
/// The base cube (if any) must lie entirely inside the domain. Cubes whose
/// clipped part holds no active cell are kept; consumers skip them.
pub fn enumerate_cubes(domain: &Domain, policy: &FamilyPolicy, base: Option<&Cube>) -> Result<CubeFamily> {
    if domain.active_count() == 0 {
        return Err(Error::EmptyDomain);
    }
    let dim = domain.dim();
    let (w0, wlen) = match base {
        Some(b) => {
            if b.is_clipped(dim) || (0..dim).any(|a| b.origin[a] < 0) {
                return Err(invalid("base cube must lie inside the domain"));
            }
            (b.origin, b.len)
        }
        None => ([0, 0], domain.res()),
    };

    // (side, positions along one axis relative to the window)
    let mut layouts: Vec<(usize, Vec<i64>)> = Vec::new();
    match policy {
        FamilyPolicy::Dyadic => {
            if !wlen.is_power_of_two() {
                return Err(invalid(format!("dyadic family needs a power-of-two side, got {wlen}")));
            }
            let mut s = wlen;
            loop {
                layouts.push((s, (0..wlen / s).map(|k| (k * s) as i64).collect()));
                if s == 1 {
                    break;
                }
                s /= 2;
            }
        }
        FamilyPolicy::Anchored => {
            for s in 1..=wlen {
                layouts.push((s, (0..=wlen - s).map(|k| k as i64).collect()));
            }
        }
        FamilyPolicy::Sliding { stride, lengths } => {
            if *stride == 0 {
                return Err(invalid("sliding stride must be positive"));
            }
            if lengths.is_empty() {
                return Err(invalid("sliding family needs at least one side length"));
            }
            for &s in lengths {
                if s == 0 || s > wlen {
                    return Err(Error::ScaleTooLarge { scale: s, extent: wlen });
                }
                let mut pos: Vec<i64> = (0..=wlen - s).step_by(*stride).map(|k| k as i64).collect();
                if pos.last() != Some(&((wlen - s) as i64)) {
                    pos.push((wlen - s) as i64);
                }
                layouts.push((s, pos));
            }
        }
        FamilyPolicy::Centered { half_sides } => {
            if base.is_some() {
                return Err(invalid("centered family is defined on the whole domain only"));
            }
            if half_sides.is_empty() {
                return Err(invalid("centered family needs at least one half-side"));
            }
            for &k in half_sides {
                if k == 0 || k > wlen {
                    return Err(Error::ScaleTooLarge { scale: k, extent: wlen });
                }
                layouts.push((2 * k, (0..=wlen).map(|v| v as i64 - k as i64).collect()));
            }
        }
    }

    let mut cubes = Vec::new();
    for (s, pos) in &layouts {
        let second: &[i64] = if dim == 2 { pos } else { &[0] };
        for &p0 in pos {
            for &p1 in second {
                let origin = [w0[0] + p0, if dim == 2 { w0[1] + p1 } else { 0 }];
                cubes.push(domain.cube(origin, *s)?);
            }
        }
    }
    Ok(CubeFamily {
        policy: Some(policy.clone()),
        base: base.cloned(),
        cubes: sort_dedup(cubes),
    })
}

/// `A = min |Q ∩ Ω| / ρⁿ` over the family.
pub fn measure_condition_constant(domain: &Domain, family: &CubeFamily) -> Result<f64> {
    if family.is_empty() {
        return Err(invalid("cube family is empty"));
    }
    let n = domain.dim() as i32;
    let mut a = f64::INFINITY;
    for q in family.iter() {
        if q.is_empty() {
            return Err(Error::MeasureCondition {
                origin: q.origin,
                len: q.len,
            });
        }
        a = a.min(q.measure / q.rho.powi(n));
    }
    Ok(a)
}

/// Real-valued samples on the active cells of a domain.
#[derive(Debug, Clone)]
pub struct GridFunction {
    domain: Arc<Domain>,
    // full grid, zero on inactive cells
    values: Vec<f64>,
}

impl GridFunction {
    /// One sample per active cell, in increasing cell order.
    pub fn new(domain: Arc<Domain>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != domain.active_count() {
            return Err(Error::SampleCount {
                expected: domain.active_count(),
                actual: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut values = vec![0.0; domain.cell_count()];
        for (&c, v) in domain.active_cells().iter().zip(samples) {
            values[c] = v;
        }
        Ok(GridFunction { domain, values })
    }

    /// Sample `f` at the active cell centers.
    pub fn from_fn(domain: Arc<Domain>, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let samples = domain.active_cells().iter().map(|&c| f(domain.cell_center(c))).collect();
        Self::new(domain, samples)
    }

    pub fn constant(domain: Arc<Domain>, c: f64) -> Result<Self> {
        let n = domain.active_count();
        Self::new(domain, vec![c; n])
    }

    /// Indicator of the active cells of `cube`.
    pub fn indicator(domain: Arc<Domain>, cube: &Cube) -> Self {
        let mut values = vec![0.0; domain.cell_count()];
        for c in domain.cells(cube) {
            values[c] = 1.0;
        }
        GridFunction { domain, values }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// Value at a linear cell index (0 on inactive cells).
    #[inline]
    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// Full-grid value array, zero on inactive cells.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Samples on the active cells, in increasing cell order.
    pub fn samples(&self) -> Vec<f64> {
        self.domain.active_cells().iter().map(|&c| self.values[c]).collect()
    }

    pub fn same_domain(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    pub(crate) fn check_same(&self, other: &GridFunction) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let mut values = vec![0.0; self.values.len()];
        for &c in self.domain.active_cells() {
            values[c] = f(self.values[c]);
        }
        GridFunction {
            domain: Arc::clone(&self.domain),
            values,
        }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_same(other)?;
        let mut values = vec![0.0; self.values.len()];
        for &c in self.domain.active_cells() {
            values[c] = f(self.values[c], other.values[c]);
        }
        Ok(GridFunction {
            domain: Arc::clone(&self.domain),
            values,
        })
    }

    pub fn abs(&self) -> GridFunction {
        self.map(f64::abs)
    }

    pub fn scale(&self, t: f64) -> GridFunction {
        self.map(|v| t * v)
    }

    /// `∫_{Q∩Ω} f` by the midpoint rule.
    pub fn integral_over(&self, cube: &Cube) -> f64 {
        self.domain.cells(cube).map(|c| self.values[c]).sum::<f64>() * self.domain.cell_volume()
    }

    /// `∫_Ω f`.
    pub fn integral(&self) -> f64 {
        self.domain.active_cells().iter().map(|&c| self.values[c]).sum::<f64>() * self.domain.cell_volume()
    }

    /// `f_Q`, the mean over the active part of `cube`.
    pub fn mean_over(&self, cube: &Cube) -> Result<f64> {
        if cube.is_empty() {
            return Err(Error::DisjointCube);
        }
        Ok(self.domain.cells(cube).map(|c| self.values[c]).sum::<f64>() / cube.active_count() as f64)
    }

    /// `|f|_Q`.
    pub fn abs_mean_over(&self, cube: &Cube) -> Result<f64> {
        if cube.is_empty() {
            return Err(Error::DisjointCube);
        }
        Ok(self.domain.cells(cube).map(|c| self.values[c].abs()).sum::<f64>() / cube.active_count() as f64)
    }

    pub fn max_abs(&self) -> f64 {
        self.domain.active_cells().iter().map(|&c| self.values[c].abs()).fold(0.0, f64::max)
    }
}

/// Means and `p`-oscillations of a function over one cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeStats {
    /// `f_Q`
    pub mean: f64,
    /// `|f|_Q`
    pub abs_mean: f64,
    /// mean of `f⁻ = −min(f, 0)`
    pub neg_mean: f64,
    /// mean of `|f − f_Q|^p`
    pub campanato: f64,
    /// mean of `|f − |f|_Q|^p`
    pub barred: f64,
    /// mean of `|f + |f|_Q|^p`
    pub tilde: f64,
    /// mean of `||f| − f_Q|^p`
    pub abs_minus_mean: f64,
    /// mean of `||f| + f_Q|^p`
    pub abs_plus_mean: f64,
}

pub fn cube_stats(f: &GridFunction, cube: &Cube, p: f64) -> Result<CubeStats> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p must be positive, got {p}")));
    }
    if cube.is_empty() {
        return Err(Error::DisjointCube);
    }
    let dom = f.domain();
    let m = cube.active_count() as f64;
    let (mut sum, mut abs_sum, mut neg_sum) = (0.0, 0.0, 0.0);
    for c in dom.cells(cube) {
        let v = f.value(c);
        sum += v;
        abs_sum += v.abs();
        neg_sum += (-v).max(0.0);
    }
    let mean = sum / m;
    let abs_mean = abs_sum / m;
    let mut acc = [0.0; 5];
    for c in dom.cells(cube) {
        let v = f.value(c);
        acc[0] += pow_abs(v - mean, p);
        acc[1] += pow_abs(v - abs_mean, p);
        acc[2] += pow_abs(v + abs_mean, p);
        acc[3] += pow_abs(v.abs() - mean, p);
        acc[4] += pow_abs(v.abs() + mean, p);
    }
    Ok(CubeStats {
        mean,
        abs_mean,
        neg_mean: neg_sum / m,
        campanato: acc[0] / m,
        barred: acc[1] / m,
        tilde: acc[2] / m,
        abs_minus_mean: acc[3] / m,
        abs_plus_mean: acc[4] / m,
    })
}

/// `(sup f⁺, sup f⁻)` over the active samples.
pub fn extremes(f: &GridFunction) -> (f64, f64) {
    f.domain().active_cells().iter().fold((0.0f64, 0.0f64), |(pos, neg), &c| {
        let v = f.value(c);
        (pos.max(v), neg.max(-v))
    })
}

/// Summed-area tables of a full-grid array and of the active-cell count.
pub(crate) struct BoxSums {
    width: usize,
    sum: Vec<f64>,
    count: Vec<u32>,
}

impl BoxSums {
    pub(crate) fn new(domain: &Domain, value: impl Fn(usize) -> f64) -> Self {
        let n0 = domain.res();
        let n1 = if domain.dim() == 2 { domain.res() } else { 1 };
        let width = n1 + 1;
        let mut sum = vec![0.0; (n0 + 1) * width];
        let mut count = vec![0u32; (n0 + 1) * width];
        for i in 0..n0 {
            for j in 0..n1 {
                let c = domain.linear([i, j]);
                let (v, k) = if domain.is_active(c) { (value(c), 1) } else { (0.0, 0) };
                let at = (i + 1) * width + j + 1;
                sum[at] = v + sum[at - width] + sum[at - 1] - sum[at - width - 1];
                count[at] = k + count[at - width] + count[at - 1] - count[at - width - 1];
            }
        }
        BoxSums { width, sum, count }
    }

    /// Sum and active count over the index box `[lo, hi)`.
    #[inline]
    pub(crate) fn query(&self, lo: [usize; 2], hi: [usize; 2]) -> (f64, u32) {
        let w = self.width;
        let (a, b, c, d) = (hi[0] * w + hi[1], lo[0] * w + hi[1], hi[0] * w + lo[1], lo[0] * w + lo[1]);
        (
            self.sum[a] - self.sum[b] - self.sum[c] + self.sum[d],
            self.count[a] + self.count[d] - self.count[b] - self.count[c],
        )
    }
}
