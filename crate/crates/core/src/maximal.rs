//! Local, fractional, global and bilinear maximal operators, commutators and
//! the maximal characterization statistic.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{pow_abs, BoxSums, Cube, CubeFamily, Domain, GridFunction};

/// Cubes with at most this many cells get the exhaustive competitor set.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

/// Which subcubes `Q′ ⊂ Q` compete in `M_{α,Q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompetitorPolicy {
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] cells, dyadic-shifted beyond.
    #[default]
    Auto,
    /// Every cell-aligned subcube.
    Exhaustive,
    /// Power-of-two sides (plus the full side) placed every half side.
    DyadicShifted,
}

fn check_alpha(alpha: f64, dim: usize) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 && alpha < dim as f64 {
        Ok(())
    } else {
        Err(invalid(format!("fractional order must lie in [0, {dim}), got {alpha}")))
    }
}

#[inline]
fn scaled_average(sum: f64, count: u32, vol: f64, alpha: f64, dim: usize) -> f64 {
    if count == 0 {
        return f64::NEG_INFINITY;
    }
    let avg = sum / count as f64;
    if alpha == 0.0 {
        avg
    } else {
        (count as f64 * vol).powf(alpha / dim as f64) * avg
    }
}

/// `M_{α,Q} f` restricted to `Q`.
#[derive(Debug, Clone)]
pub struct LocalMaximal {
    pub cube: Cube,
    /// Zero outside the cube.
    pub values: GridFunction,
    /// Whether every cell-aligned subcube was a competitor.
    pub exact: bool,
}

/// Maximum over positions `o ∈ pos` with `x − s < o ≤ x`, for every `x` in `xs`.
fn window_max(pos: &[i64], val: &[f64], s: usize, xs: std::ops::Range<usize>, out: &mut Vec<f64>) {
    out.clear();
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for x in xs {
        let x = x as i64;
        while next < pos.len() && pos[next] <= x {
            while dq.back().is_some_and(|&b| val[b] <= val[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&f| pos[f] + s as i64 <= x) {
            dq.pop_front();
        }
        out.push(dq.front().map_or(f64::NEG_INFINITY, |&f| val[f]));
    }
}

fn positions(start: i64, last: i64, stride: usize, lo: i64, hi: i64) -> Vec<i64> {
    let mut v: Vec<i64> = (start..=last).step_by(stride).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v.retain(|&o| o >= lo && o <= hi);
    v
}

/// Core of the local maximal computation. Returns values on the clipped box
/// of `cube` in row-major order and the exactness flag.
fn local_maximal_box(
    dom: &Domain,
    sums: &BoxSums,
    cube: &Cube,
    alpha: f64,
    policy: CompetitorPolicy,
) -> (Vec<f64>, bool) {
    let dim = dom.dim();
    let len = cube.len();
    let exact = match policy {
        CompetitorPolicy::Exhaustive => true,
        CompetitorPolicy::DyadicShifted => false,
        CompetitorPolicy::Auto => len.pow(dim as u32) <= EXHAUSTIVE_LIMIT,
    };
    let sizes: Vec<usize> = if exact {
        (1..=len).collect()
    } else {
        let mut s: Vec<usize> = std::iter::successors(Some(1usize), |&k| Some(k * 2)).take_while(|&k| k < len).collect();
        s.push(len);
        s
    };
    let (lo, hi) = cube.ranges();
    let ext1 = hi[1] - lo[1];
    let vol = dom.cell_volume();
    let res = dom.res() as i64;
    let origin = cube.origin();
    let mut best = vec![f64::NEG_INFINITY; (hi[0] - lo[0]) * ext1];
    let mut tmp = Vec::new();

    for &s in &sizes {
        let stride = if exact { 1 } else { (s / 2).max(1) };
        let axis_pos = |a: usize| {
            positions(origin[a], origin[a] + (len - s) as i64, stride, 1 - s as i64, res - 1)
        };
        let p0 = axis_pos(0);
        let p1 = if dim == 2 { axis_pos(1) } else { vec![0] };
        let clip = |o: i64| -> (usize, usize) { (o.max(0) as usize, ((o + s as i64).min(res)) as usize) };
        let s1 = if dim == 2 { s } else { 1 };

        // row stage: for each axis-0 position, window max along axis 1
        let mut rows = vec![f64::NEG_INFINITY; p0.len() * ext1];
        let mut vals = vec![0.0; p1.len()];
        for (r, &o0) in p0.iter().enumerate() {
            let (a0, b0) = clip(o0);
            for (k, &o1) in p1.iter().enumerate() {
                let (a1, b1) = if dim == 2 { clip(o1) } else { (0, 1) };
                let (sum, count) = sums.query([a0, a1], [b0, b1]);
                vals[k] = scaled_average(sum, count, vol, alpha, dim);
            }
            window_max(&p1, &vals, s1, lo[1]..hi[1], &mut tmp);
            rows[r * ext1..(r + 1) * ext1].copy_from_slice(&tmp);
        }
        // column stage
        let mut col = vec![0.0; p0.len()];
        for j in 0..ext1 {
            for r in 0..p0.len() {
                col[r] = rows[r * ext1 + j];
            }
            window_max(&p0, &col, s, lo[0]..hi[0], &mut tmp);
            for (i, &v) in tmp.iter().enumerate() {
                let at = i * ext1 + j;
                if v > best[at] {
                    best[at] = v;
                }
            }
        }
    }
    (best, exact)
}

fn abs_sums(f: &GridFunction) -> BoxSums {
    BoxSums::new(f.domain(), |c| f.value(c).abs())
}

/// `M_{α,Q} f(x) = max_{x ∈ Q′ ⊂ Q} |Q′|^{α/n − 1} ∫_{Q′} |f|` at every active cell of `Q`.
pub fn local_maximal(f: &GridFunction, cube: &Cube, alpha: f64) -> Result<LocalMaximal> {
    local_maximal_with(f, cube, alpha, CompetitorPolicy::Auto)
}

pub fn local_maximal_with(
    f: &GridFunction,
    cube: &Cube,
    alpha: f64,
    policy: CompetitorPolicy,
) -> Result<LocalMaximal> {
    let dom = f.domain();
    check_alpha(alpha, dom.dim())?;
    if cube.is_empty() {
        return Err(Error::DisjointCube);
    }
    let (vals, exact) = local_maximal_box(dom, &abs_sums(f), cube, alpha, policy);
    Ok(LocalMaximal {
        cube: cube.clone(),
        values: box_to_function(dom, cube, &vals),
        exact,
    })
}

fn box_to_function(dom: &Arc<Domain>, cube: &Cube, vals: &[f64]) -> GridFunction {
    let (lo, hi) = cube.ranges();
    let ext1 = hi[1] - lo[1];
    let mut full = vec![0.0; dom.cell_count()];
    for i in lo[0]..hi[0] {
        for j in lo[1]..hi[1] {
            let c = dom.linear([i, j]);
            if dom.is_active(c) {
                full[c] = vals[(i - lo[0]) * ext1 + (j - lo[1])];
            }
        }
    }
    let samples = dom.active_cells().iter().map(|&c| full[c]).collect();
    GridFunction::new(Arc::clone(dom), samples).expect("finite maximal values")
}

/// Pointwise sup of a per-cube value over the non-empty family cubes containing each cell.
fn family_sup(
    dom: &Arc<Domain>,
    family: &CubeFamily,
    value: impl Fn(&Cube) -> f64,
) -> Result<GridFunction> {
    if family.is_empty() {
        return Err(invalid("cube family is empty"));
    }
    if let Some(c) = family.first_uncovered(dom) {
        return Err(Error::Uncovered(c));
    }
    let mut best = vec![f64::NEG_INFINITY; dom.cell_count()];
    for q in family.iter().filter(|q| !q.is_empty()) {
        let v = value(q);
        for c in dom.cells(q) {
            if v > best[c] {
                best[c] = v;
            }
        }
    }
    let samples = dom.active_cells().iter().map(|&c| best[c]).collect();
    GridFunction::new(Arc::clone(dom), samples)
}

/// `M_α f(x) = sup_{x ∈ Q ∈ family} |Q|^{α/n − 1} ∫_Q |f|`.
pub fn global_maximal(f: &GridFunction, family: &CubeFamily, alpha: f64) -> Result<GridFunction> {
    let dom = f.domain();
    check_alpha(alpha, dom.dim())?;
    let sums = abs_sums(f);
    let vol = dom.cell_volume();
    family_sup(dom, family, |q| {
        let (lo, hi) = q.ranges();
        let (s, n) = sums.query(lo, hi);
        scaled_average(s, n, vol, alpha, dom.dim())
    })
}

/// `𝓜(f₁, f₂)(x) = sup_{x ∈ Q} |f₁|_Q·|f₂|_Q`.
pub fn bilinear_maximal(f1: &GridFunction, f2: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    f1.check_same(f2)?;
    let dom = f1.domain();
    let (s1, s2) = (abs_sums(f1), abs_sums(f2));
    family_sup(dom, family, |q| {
        let (lo, hi) = q.ranges();
        let (a, n) = s1.query(lo, hi);
        let (b, _) = s2.query(lo, hi);
        (a / n as f64) * (b / n as f64)
    })
}

/// `[b, M_α](f) = b·M_α f − M_α(b f)`.
pub fn commutator(b: &GridFunction, f: &GridFunction, alpha: f64, family: &CubeFamily) -> Result<GridFunction> {
    b.check_same(f)?;
    let mf = global_maximal(f, family, alpha)?;
    let bf = b.zip_map(f, |x, y| x * y)?;
    let mbf = global_maximal(&bf, family, alpha)?;
    b.zip_map(&mf, |x, m| x * m)?.zip_map(&mbf, |x, y| x - y)
}

/// `(b₁ + b₂)·𝓜(f₁, f₂) − 𝓜(b₁f₁, f₂) − 𝓜(f₁, b₂f₂)`.
pub fn bilinear_commutator(
    b1: &GridFunction,
    b2: &GridFunction,
    f1: &GridFunction,
    f2: &GridFunction,
    family: &CubeFamily,
) -> Result<GridFunction> {
    b1.check_same(b2)?;
    b1.check_same(f1)?;
    b1.check_same(f2)?;
    let m = bilinear_maximal(f1, f2, family)?;
    let m1 = bilinear_maximal(&b1.zip_map(f1, |x, y| x * y)?, f2, family)?;
    let m2 = bilinear_maximal(f1, &b2.zip_map(f2, |x, y| x * y)?, family)?;
    let sum = b1.zip_map(b2, |x, y| x + y)?;
    sum.zip_map(&m, |s, v| s * v)?.zip_map(&m1, |x, y| x - y)?.zip_map(&m2, |x, y| x - y)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharStatistic {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    /// One value per family cube (0 on empty cubes).
    #[serde(skip)]
    pub values: Vec<f64>,
    pub sup: f64,
    #[serde(skip)]
    pub index: Option<usize>,
    pub cube: Option<Cube>,
    pub exact: bool,
}

impl CharStatistic {
    pub(crate) fn from_values(p: f64, q: f64, alpha: f64, beta: f64, values: Vec<f64>, exact: bool, family: &CubeFamily) -> Self {
        let mut index = None;
        let mut sup = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if index.is_none() || v > sup {
                sup = v;
                index = Some(i);
            }
        }
        CharStatistic {
            p,
            q,
            alpha,
            beta,
            sup,
            cube: index.map(|i| family.cubes()[i].clone()),
            index,
            values,
            exact,
        }
    }
}

/// Deviation `b − |Q|^{−α/n} M_{α,Q} b` on the active cells of `Q`, with the cell ids.
pub(crate) fn deviations(
    b: &GridFunction,
    sums: &BoxSums,
    q: &Cube,
    alpha: f64,
    policy: CompetitorPolicy,
) -> (Vec<(usize, f64)>, bool) {
    let dom = b.domain();
    let (vals, exact) = local_maximal_box(dom, sums, q, alpha, policy);
    let scale = if alpha == 0.0 { 1.0 } else { q.measure().powf(-alpha / dom.dim() as f64) };
    let (lo, hi) = q.ranges();
    let ext1 = hi[1] - lo[1];
    let mut out = Vec::with_capacity(q.active_count());
    for i in lo[0]..hi[0] {
        for j in lo[1]..hi[1] {
            let c = dom.linear([i, j]);
            if dom.is_active(c) {
                out.push((c, b.value(c) - scale * vals[(i - lo[0]) * ext1 + (j - lo[1])]));
            }
        }
    }
    (out, exact)
}

/// `sup_Q |Q|^{−β} (avg_Q |b − |Q|^{−α/n} M_{α,Q} b|^p)^{1/p}`.
pub fn char_statistic(b: &GridFunction, family: &CubeFamily, alpha: f64, beta: f64, p: f64) -> Result<CharStatistic> {
    char_statistic_with(b, family, alpha, beta, p, CompetitorPolicy::Auto)
}

pub fn char_statistic_with(
    b: &GridFunction,
    family: &CubeFamily,
    alpha: f64,
    beta: f64,
    p: f64,
    policy: CompetitorPolicy,
) -> Result<CharStatistic> {
    let dom = b.domain();
    check_alpha(alpha, dom.dim())?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(invalid(format!("p must be at least 1, got {p}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(invalid(format!("beta must be non-negative, got {beta}")));
    }
    if family.is_empty() {
        return Err(invalid("cube family is empty"));
    }
    let sums = abs_sums(b);
    let per: Vec<(f64, bool)> = family
        .cubes()
        .par_iter()
        .map(|q| {
            if q.is_empty() {
                return (0.0, true);
            }
            let (dev, exact) = deviations(b, &sums, q, alpha, policy);
            let mean = dev.iter().map(|&(_, d)| pow_abs(d, p)).sum::<f64>() / dev.len() as f64;
            (q.measure().powf(-beta) * mean.powf(1.0 / p), exact)
        })
        .collect();
    let exact = per.iter().all(|&(_, e)| e);
    let values = per.into_iter().map(|(v, _)| v).collect();
    Ok(CharStatistic::from_values(p, p, alpha, beta, values, exact, family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{enumerate_cubes, FamilyPolicy};

    fn line(res: usize) -> Arc<Domain> {
        Arc::new(Domain::unit(1, res).unwrap())
    }

    fn brute_local(f: &[f64], lo: usize, hi: usize, h: f64, alpha: f64) -> Vec<f64> {
        (lo..hi)
            .map(|x| {
                let mut m = f64::NEG_INFINITY;
                for a in lo..=x {
                    for b in x + 1..=hi {
                        let avg = f[a..b].iter().map(|v| v.abs()).sum::<f64>() / (b - a) as f64;
                        m = m.max(((b - a) as f64 * h).powf(alpha) * avg);
                    }
                }
                m
            })
            .collect()
    }

    #[test]
    fn indicator_maximal_is_one() {
        let d = line(16);
        let q = d.cube([4, 0], 8).unwrap();
        let chi = GridFunction::indicator(d.clone(), &q);
        let m = local_maximal(&chi, &q, 0.0).unwrap();
        assert!(m.exact);
        for c in d.cells(&q) {
            assert_eq!(m.values.value(c), 1.0);
        }
    }

    #[test]
    fn constant_fractional_takes_largest_competitor() {
        let d = Arc::new(Domain::unit(2, 8).unwrap());
        let q = d.cube([2, 2], 4).unwrap();
        let one = GridFunction::constant(d.clone(), 1.0).unwrap();
        let m = local_maximal(&one, &q, 0.5).unwrap();
        let expect = q.measure().powf(0.25);
        for c in d.cells(&q) {
            assert!((m.values.value(c) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn local_matches_brute_force() {
        let d = line(12);
        let xs = vec![0.3, -2.0, 1.1, 0.0, 4.2, -0.5, 0.7, 2.2, -3.1, 0.9, 1.5, -0.2];
        let f = GridFunction::new(d.clone(), xs.clone()).unwrap();
        let q = d.cube([2, 0], 8).unwrap();
        for alpha in [0.0, 0.3] {
            let m = local_maximal(&f, &q, alpha).unwrap();
            let oracle = brute_local(&xs, 2, 10, d.cell_width(), alpha);
            for (k, x) in (2..10).enumerate() {
                assert!((m.values.value(x) - oracle[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn clipped_cube_uses_clipped_competitors() {
        let d = line(8);
        let xs = vec![5.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let f = GridFunction::new(d.clone(), xs).unwrap();
        // unclipped [-2, 2) keeps cells {0, 1}; the clipped [-1, 1) is the singleton {0}
        let q = d.cube([-2, 0], 4).unwrap();
        let m = local_maximal(&f, &q, 0.0).unwrap();
        assert_eq!(m.values.value(0), 5.0);
        assert_eq!(m.values.value(1), 3.0);
        assert_eq!(m.values.value(2), 0.0);
    }

    #[test]
    fn dyadic_shifted_is_a_lower_bound() {
        let d = line(64);
        let f = GridFunction::from_fn(d.clone(), |x| (9.0 * x[0]).sin()).unwrap();
        let q = d.full_cube();
        let ex = local_maximal_with(&f, &q, 0.0, CompetitorPolicy::Exhaustive).unwrap();
        let ds = local_maximal_with(&f, &q, 0.0, CompetitorPolicy::DyadicShifted).unwrap();
        assert!(!ds.exact);
        for c in 0..64 {
            assert!(ds.values.value(c) <= ex.values.value(c) + 1e-15);
            assert!(ds.values.value(c) >= f.value(c).abs() - 1e-15);
        }
    }

    #[test]
    fn global_spike_matches_oracle() {
        let d = line(16);
        let fam = enumerate_cubes(&d, &FamilyPolicy::Anchored, None).unwrap();
        let mut xs = vec![0.0; 16];
        xs[5] = 1.0;
        let f = GridFunction::new(d.clone(), xs.clone()).unwrap();
        let m = global_maximal(&f, &fam, 0.0).unwrap();
        let oracle = brute_local(&xs, 0, 16, d.cell_width(), 0.0);
        for c in 0..16 {
            assert!((m.value(c) - oracle[c]).abs() < 1e-14);
        }
        let c = GridFunction::constant(d.clone(), -2.0).unwrap();
        let mc = global_maximal(&c, &fam, 0.0).unwrap();
        assert!(mc.samples().iter().all(|&v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn uncovered_family_rejected() {
        let d = line(8);
        let fam = CubeFamily::from_cubes(vec![d.cube([0, 0], 4).unwrap()]);
        let f = GridFunction::constant(d.clone(), 1.0).unwrap();
        assert!(matches!(global_maximal(&f, &fam, 0.0), Err(Error::Uncovered(4))));
    }

    #[test]
    fn bilinear_and_commutators() {
        let d = line(8);
        let fam = enumerate_cubes(&d, &FamilyPolicy::Anchored, None).unwrap();
        let f1 = GridFunction::new(d.clone(), vec![0.2, -1.0, 3.0, 0.5, 0.0, 2.0, -0.3, 1.0]).unwrap();
        let one = GridFunction::constant(d.clone(), 1.0).unwrap();
        let a = bilinear_maximal(&f1, &one, &fam).unwrap();
        let b = global_maximal(&f1, &fam, 0.0).unwrap();
        for c in 0..8 {
            assert!((a.value(c) - b.value(c)).abs() < 1e-14);
        }
        let c = GridFunction::constant(d.clone(), 3.0).unwrap();
        let k = commutator(&c, &f1, 0.0, &fam).unwrap();
        assert!(k.max_abs() < 1e-13);
        let k2 = bilinear_commutator(&c, &c, &f1, &one, &fam).unwrap();
        assert!(k2.max_abs() < 1e-12);
    }

    #[test]
    fn char_statistic_constants() {
        let d = line(16);
        let fam = enumerate_cubes(&d, &FamilyPolicy::Anchored, None).unwrap();
        let c = GridFunction::constant(d.clone(), 0.7).unwrap();
        for alpha in [0.0, 0.5] {
            assert!(char_statistic(&c, &fam, alpha, 0.0, 1.0).unwrap().sup < 1e-14);
        }
        let m = GridFunction::constant(d.clone(), -1.0).unwrap();
        let s = char_statistic(&m, &fam, 0.0, 0.0, 1.0).unwrap();
        assert!((s.sup - 2.0).abs() < 1e-14);
        assert!(s.exact);
    }

    #[test]
    fn alpha_out_of_range() {
        let d = line(4);
        let f = GridFunction::constant(d.clone(), 1.0).unwrap();
        assert!(local_maximal(&f, &d.full_cube(), 1.0).is_err());
        assert!(local_maximal(&f, &d.full_cube(), -0.1).is_err());
    }
}
