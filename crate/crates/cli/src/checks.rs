//! Registered checks, keyed by theorem tag.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use campanato_core::czd::{cz_decompose, default_thresholds, distribution, fit_exponential_decay, jn_generations, DEFAULT_TAU};
use campanato_core::maximal::{
    bilinear_commutator, bilinear_maximal, char_statistic, commutator, global_maximal, local_maximal,
};
use campanato_core::seminorms::{
    holder_seminorm, minimizing_constant, seminorm, Constraint, Normalization, SeminormKind, SeminormSpec,
};
use campanato_core::synth::{generate, Generator};
use campanato_core::weights::{muckenhoupt_constant, rubio_de_francia, weighted_char_statistic, Weight, WeightClass};
use campanato_core::{enumerate_cubes, extremes, Cube, CubeFamily, Domain, FamilyPolicy, GridFunction};

use crate::config::SuiteConfig;
use crate::report::{CheckResult, Measured};

type CheckFn = fn(&Ctx) -> campanato_core::Result<Outcome>;

pub struct Check {
    pub tag: &'static str,
    pub description: &'static str,
    run: CheckFn,
}

pub const CHECKS: &[Check] = &[
    Check { tag: "thm2.1", description: "barred <= 2^p morrey per cube; reverse ratio stable under refinement", run: thm2_1 },
    Check { tag: "jn3.1", description: "exponential decay of |f - |f|_Q| and the constructive generation bound", run: jn3_1 },
    Check { tag: "def3.5", description: "campanato <= 2 barred, sup f^- <= barred/2, barred <= 3 abs_minus_mean", run: def3_5 },
    Check { tag: "pc1", description: "inf_nonneg <= barred <= 2 inf_nonneg", run: pc1 },
    Check { tag: "jncp", description: "exponential decay of |f - c_Q| with the non-negative minimizer c_Q", run: jncp },
    Check { tag: "jnm1", description: "barred <= 2 avg|f - M_Q f| per cube", run: jnm1 },
    Check { tag: "jnmalpha", description: "|f|_Q <= |Q|^(-alpha/n) M_{alpha,Q} f <= M_Q f pointwise", run: jnmalpha },
    Check { tag: "cmain", description: "Holder bound on the scaled barred seminorm; growth for negative shifts", run: cmain },
    Check { tag: "mlip", description: "scaled avg|b - M_Q b| bounded by n^(beta/2) H and stable under refinement", run: mlip },
    Check { tag: "jnlip", description: "pointwise |b - M_Q b| <= n^(beta/2) H |Q|^(beta/n)", run: jnlip },
    Check { tag: "weighted5", description: "Muckenhoupt constants >= 1, unit weight reduction, concrete A_{p,q} instance", run: weighted5 },
    Check { tag: "bilinear6", description: "bilinear maximal identities and product bound, commutator necessity identity", run: bilinear6 },
    Check { tag: "eqjn9", description: "CZ selection window (tau, 2^n tau] and generation measure decay", run: eqjn9 },
    Check { tag: "thmr", description: "Rubio de Francia domination and truncated A1 bound", run: thmr },
];

pub fn lookup(tag: &str) -> Option<&'static Check> {
    CHECKS.iter().find(|c| c.tag == tag)
}

/// Run one registered check. Library errors surface as a failed result whose witness is the error.
pub fn run_check(check: &Check, cfg: &SuiteConfig) -> CheckResult {
    let start = Instant::now();
    let ctx = Ctx { cfg };
    let out = (check.run)(&ctx).unwrap_or_else(|e| {
        let mut o = Outcome::default();
        o.fail(|| format!("error: {e}"));
        o
    });
    CheckResult {
        tag: check.tag.to_string(),
        pass: out.pass,
        measured: out.measured,
        tolerance: out.tolerance.unwrap_or(cfg.tolerances.exact),
        witness: out.witness,
        runtime: Some(start.elapsed().as_secs_f64()),
    }
}

struct Outcome {
    pass: bool,
    witness: Option<String>,
    measured: BTreeMap<String, Measured>,
    tolerance: Option<f64>,
}

impl Default for Outcome {
    fn default() -> Self {
        Outcome { pass: true, witness: None, measured: BTreeMap::new(), tolerance: None }
    }
}

impl Outcome {
    fn fail(&mut self, witness: impl FnOnce() -> String) {
        if self.pass {
            self.witness = Some(witness());
        }
        self.pass = false;
    }

    fn require(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        if !ok {
            self.fail(witness);
        }
    }

    fn set(&mut self, key: &str, v: f64) {
        self.measured.insert(key.to_string(), Measured(v));
    }

    fn max(&mut self, key: &str, v: f64) {
        let e = self.measured.entry(key.to_string()).or_insert(Measured(f64::NEG_INFINITY));
        e.0 = e.0.max(v);
    }

    fn min(&mut self, key: &str, v: f64) {
        let e = self.measured.entry(key.to_string()).or_insert(Measured(f64::INFINITY));
        e.0 = e.0.min(v);
    }
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
}

impl Ctx<'_> {
    fn dim(&self) -> usize {
        self.cfg.dimension
    }

    fn n(&self) -> f64 {
        self.cfg.dimension as f64
    }

    fn tol(&self) -> f64 {
        self.cfg.tolerances.exact
    }

    fn sizes(&self) -> Vec<usize> {
        self.cfg.sorted_sizes()
    }

    fn smallest(&self) -> usize {
        self.sizes()[0]
    }

    fn largest(&self) -> usize {
        *self.sizes().last().unwrap()
    }

    fn domain(&self, res: usize) -> campanato_core::Result<Arc<Domain>> {
        Ok(Arc::new(Domain::unit(self.dim(), res)?))
    }

    fn family(&self, d: &Domain) -> campanato_core::Result<CubeFamily> {
        enumerate_cubes(d, &self.cfg.family, None)
    }

    fn seed(&self, k: usize) -> u64 {
        self.cfg.seed.wrapping_add(k as u64)
    }

    fn random(&self, d: &Arc<Domain>, k: usize, pieces: usize) -> campanato_core::Result<GridFunction> {
        generate(d.clone(), &Generator::RandomUniform { pieces: pieces.min(d.res()) }, self.seed(k))
    }

    /// Named functions exercised by the sign-sensitive chains.
    fn corpus(&self, d: &Arc<Domain>) -> campanato_core::Result<Vec<(String, GridFunction)>> {
        let pieces = 16.min(d.res());
        let gens = [
            Generator::Constant { value: 2.0 },
            Generator::Constant { value: -1.5 },
            Generator::Step,
            Generator::PowerCusp { beta: 0.5 },
            Generator::PowerCusp { beta: 1.0 },
            Generator::LogSingularity { center: 0.5, amplitude: 1.0 },
            Generator::LogSingularity { center: 0.5, amplitude: -1.0 },
            Generator::LogSingularity { center: 0.3, amplitude: 1.0 },
            Generator::RandomSigns { pieces },
            Generator::RandomUniform { pieces },
        ];
        let mut out = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            out.push((g.name().to_string(), generate(d.clone(), g, self.seed(k))?));
        }
        let cusp = generate(d.clone(), &Generator::PowerCusp { beta: 0.5 }, 0)?;
        let m = cusp.max_abs();
        out.push(("shifted_cusp".into(), cusp.map(|v| v - m - 1.0)));
        out.push(("wave".into(), GridFunction::from_fn(d.clone(), |x| (7.0 * x[0]).sin() - 0.3)?));
        Ok(out)
    }
}

fn show(q: &Cube) -> String {
    format!("cube origin {:?} side {}", q.origin(), q.len())
}

fn exceeds(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs > rhs + tol * rhs.abs().max(1.0)
}

fn refinement_ok(values: &[f64], factor: f64) -> (bool, f64) {
    let mut worst = 1.0f64;
    let mut ok = values.iter().all(|v| v.is_finite() && *v > 0.0);
    for w in values.windows(2) {
        let r = w[1] / w[0];
        if !(1.0 / factor..=factor).contains(&r) {
            ok = false;
        }
        if (r.ln()).abs() > worst.ln().abs() {
            worst = r;
        }
    }
    (ok, worst)
}

fn thm2_1(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    let e = &ctx.cfg.exponents;
    o.set("max_barred_over_2p_morrey", 0.0);
    o.set("max_root_ratio", 0.0);
    for k in 0..ctx.cfg.samples {
        for &p in &e.p {
            for &lambda in &e.lambda {
                let mut reverse = Vec::new();
                for res in ctx.sizes() {
                    let d = ctx.domain(res)?;
                    let f = ctx.random(&d, k, 8)?;
                    let fam = ctx.family(&d)?;
                    let spec = |kind| SeminormSpec::new(kind, p, lambda, Normalization::Radius);
                    let bar = seminorm(&f, &spec(SeminormKind::Barred)?, &fam)?;
                    let mor = seminorm(&f, &spec(SeminormKind::Morrey)?, &fam)?;
                    let bound = 2f64.powf(p);
                    for (i, (b, m)) in bar.values.iter().zip(&mor.values).enumerate() {
                        o.require(*b <= bound * m * (1.0 + tol), || {
                            format!("sample {k}, p={p}, lambda={lambda}, res={res}: {}", show(&fam.cubes()[i]))
                        });
                        if *m > 0.0 {
                            o.max("max_barred_over_2p_morrey", b / (bound * m));
                            o.max("max_root_ratio", (b / m).powf(1.0 / p));
                        }
                    }
                    reverse.push(mor.root / bar.root);
                }
                let (ok, r) = refinement_ok(&reverse, ctx.cfg.tolerances.refinement);
                o.require(ok, || format!("sample {k}, p={p}, lambda={lambda}: morrey/barred moved by {r}"));
                let worst = o.measured.get("reverse_refinement_ratio").map_or(1.0, |m| m.0);
                if r.ln().abs() >= worst.ln().abs() {
                    o.set("reverse_refinement_ratio", r);
                }
            }
        }
    }
    Ok(o)
}

fn decay_check(ctx: &Ctx, o: &mut Outcome, g: &GridFunction, q: &Cube) -> campanato_core::Result<Vec<(f64, f64)>> {
    let ts = default_thresholds(g, q)?;
    let prof = distribution(g, q, &ts)?;
    let fit = fit_exponential_decay(&prof, ts[0], ts[ts.len() - 1])?;
    o.set("c1", fit.c1);
    o.set("c2", fit.c2);
    o.set("r2", fit.r2);
    let min_r2 = ctx.cfg.tolerances.min_r2;
    o.require(fit.c2 > 0.0 && fit.r2 >= min_r2, || format!("fit c2={}, R^2={} (minimum {min_r2})", fit.c2, fit.r2));
    o.tolerance = Some(min_r2);
    Ok(prof.thresholds.into_iter().zip(prof.fractions).collect())
}

fn jn3_1(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let d = ctx.domain(ctx.largest())?;
    let f = generate(d.clone(), &Generator::LogSingularity { center: 0.5, amplitude: 1.0 }, 0)?;
    let q = d.full_cube();
    let r = f.abs_mean_over(&q)?;
    let g = f.map(|v| (v - r).abs());
    let profile = decay_check(ctx, &mut o, &g, &q)?;

    let fam = enumerate_cubes(&d, &FamilyPolicy::Dyadic, Some(&q))?;
    let s = seminorm(&f, &SeminormSpec::averaged(SeminormKind::Barred, 1.0, ctx.dim())?, &fam)?.sup;
    let tau = DEFAULT_TAU;
    let step = 2f64.powi(ctx.dim() as i32 + 2) * tau * s;
    o.set("seminorm", s);
    let mut worst = 0.0f64;
    for (t, mu) in profile {
        let bound = tau.powf(-(t / step).floor());
        worst = worst.max(mu / bound);
        o.require(mu <= bound, || format!("threshold {t}: measure fraction {mu} > {bound}"));
    }
    o.set("max_fraction_over_bound", worst);
    Ok(o)
}

fn def3_5(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    for res in ctx.sizes() {
        let d = ctx.domain(res)?;
        let fam = ctx.family(&d)?;
        for (name, f) in ctx.corpus(&d)? {
            let spec = |k| SeminormSpec::averaged(k, 1.0, ctx.dim());
            let camp = seminorm(&f, &spec(SeminormKind::Campanato)?, &fam)?.sup;
            let bar = seminorm(&f, &spec(SeminormKind::Barred)?, &fam)?.sup;
            let amm = seminorm(&f, &spec(SeminormKind::AbsMinusMean)?, &fam)?.sup;
            let neg = extremes(&f).1;
            let chain = [
                ("campanato_over_2barred", camp, 2.0 * bar),
                ("negpart_over_half_barred", neg, 0.5 * bar),
                ("barred_over_3absminusmean", bar, 3.0 * amm),
            ];
            for (key, lhs, rhs) in chain {
                o.require(!exceeds(lhs, rhs, tol), || format!("{name} at res {res}: {key} violated, {lhs} > {rhs}"));
                o.max(key, if rhs > 0.0 { lhs / rhs } else { 0.0 });
            }
        }
    }
    Ok(o)
}

fn pc1(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    for res in ctx.sizes() {
        let d = ctx.domain(res)?;
        let fam = ctx.family(&d)?;
        for (name, f) in ctx.corpus(&d)? {
            let spec = |k| SeminormSpec::averaged(k, 1.0, ctx.dim());
            let inf = seminorm(&f, &spec(SeminormKind::InfNonneg)?, &fam)?.sup;
            let bar = seminorm(&f, &spec(SeminormKind::Barred)?, &fam)?.sup;
            o.require(!exceeds(inf, bar, tol) && !exceeds(bar, 2.0 * inf, tol), || {
                format!("{name} at res {res}: inf_nonneg={inf}, barred={bar}")
            });
            if bar > 0.0 {
                o.max("inf_over_barred", inf / bar);
                o.max("barred_over_2inf", bar / (2.0 * inf));
            }
        }
    }
    Ok(o)
}

fn jncp(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let d = ctx.domain(ctx.largest())?;
    let f = generate(d.clone(), &Generator::LogSingularity { center: 0.5, amplitude: 1.0 }, 0)?;
    let q = d.full_cube();
    let c = minimizing_constant(&f, &q, 1.0, Constraint::Nonneg)?;
    o.set("c_q", c);
    let g = f.map(|v| (v - c).abs());
    decay_check(ctx, &mut o, &g, &q)?;
    Ok(o)
}

fn jnm1(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    for res in ctx.sizes() {
        let d = ctx.domain(res)?;
        let fam = ctx.family(&d)?;
        for (name, f) in ctx.corpus(&d)? {
            let bar = seminorm(&f, &SeminormSpec::averaged(SeminormKind::Barred, 1.0, ctx.dim())?, &fam)?;
            let st = char_statistic(&f, &fam, 0.0, 0.0, 1.0)?;
            o.require(st.sup.is_finite(), || format!("{name} at res {res}: statistic not finite"));
            for (i, (b, m)) in bar.values.iter().zip(&st.values).enumerate() {
                o.require(!exceeds(*b, 2.0 * m, tol), || format!("{name} at res {res}: {}", show(&fam.cubes()[i])));
                if *m > 0.0 {
                    o.max("max_barred_over_2stat", b / (2.0 * m));
                }
            }
            o.max("max_statistic", st.sup);
        }
    }
    Ok(o)
}

fn jnmalpha(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    let d = ctx.domain(ctx.smallest())?;
    let fam = ctx.family(&d)?;
    let mut pairs = 0usize;
    for k in 0..ctx.cfg.samples {
        let f = ctx.random(&d, k, d.res())?;
        for q in fam.iter() {
            let avg = f.abs_mean_over(q)?;
            let m0 = local_maximal(&f, q, 0.0)?;
            for &alpha in &ctx.cfg.exponents.alpha {
                let ma = local_maximal(&f, q, alpha)?;
                let scale = q.measure().powf(-alpha / ctx.n());
                for c in d.cells(q) {
                    let mid = scale * ma.values.value(c);
                    let top = m0.values.value(c);
                    let slack = tol * top.abs().max(1e-300);
                    o.require(avg <= mid + slack && mid <= top + slack, || {
                        format!("sample {k}, alpha={alpha}, {}, cell {c}: {avg} <= {mid} <= {top} fails", show(q))
                    });
                    pairs += 1;
                }
            }
        }
    }
    o.set("pairs", pairs as f64);
    Ok(o)
}

fn cmain(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    let n = ctx.n();
    for &beta in &ctx.cfg.exponents.beta {
        let mut shifted = Vec::new();
        for res in ctx.sizes() {
            let d = ctx.domain(res)?;
            let fam = ctx.family(&d)?;
            let f = generate(d.clone(), &Generator::PowerCusp { beta }, 0)?;
            let h = holder_seminorm(&f, beta)?;
            let spec = |k| SeminormSpec::new(k, 1.0, n + beta, Normalization::Volume);
            let bar = seminorm(&f, &spec(SeminormKind::Barred)?, &fam)?.sup;
            let inf = seminorm(&f, &spec(SeminormKind::InfNonneg)?, &fam)?.sup;
            let bound = n.powf(beta / 2.0) * h.value;
            o.require(h.exact && !exceeds(bar, bound, tol) && inf.is_finite(), || {
                format!("beta={beta}, res={res}: barred {bar} vs bound {bound}, inf_nonneg {inf}, exact {}", h.exact)
            });
            o.max("max_barred_over_bound", bar / bound);
            let m = f.max_abs();
            let neg = f.map(|v| v - m - 1.0);
            shifted.push(seminorm(&neg, &spec(SeminormKind::Barred)?, &fam)?.sup);
        }
        o.require(shifted.windows(2).all(|w| w[1] > w[0]), || format!("beta={beta}: shifted statistic {shifted:?} does not grow"));
        if shifted.len() >= 2 {
            o.min("min_shifted_growth", shifted[shifted.len() - 1] / shifted[0]);
        }
    }
    Ok(o)
}

/// The Hölder-scaled statistics use `|Q|^{β/n}`, the side length to the power β.
fn mlip(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    let n = ctx.n();
    for &beta in &ctx.cfg.exponents.beta {
        let mut ks = Vec::new();
        for res in ctx.sizes() {
            let d = ctx.domain(res)?;
            let fam = ctx.family(&d)?;
            let b = generate(d.clone(), &Generator::PowerCusp { beta }, 0)?;
            let h = holder_seminorm(&b, beta)?.value;
            let k = char_statistic(&b, &fam, 0.0, beta / n, 1.0)?.sup / h;
            let bound = n.powf(beta / 2.0);
            o.require(k.is_finite() && !exceeds(k, bound, tol), || format!("beta={beta}, res={res}: K={k} exceeds {bound}"));
            o.max("max_k", k);
            ks.push(k);
        }
        let (ok, r) = refinement_ok(&ks, ctx.cfg.tolerances.refinement);
        o.require(ok, || format!("beta={beta}: K moved by {r} across refinement ({ks:?})"));
        o.max("max_refinement_ratio", r.max(1.0 / r));
    }
    Ok(o)
}

fn jnlip(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    let n = ctx.n();
    let d = ctx.domain(ctx.smallest())?;
    let fam = ctx.family(&d)?;
    for &beta in &ctx.cfg.exponents.beta {
        let b = generate(d.clone(), &Generator::PowerCusp { beta }, 0)?;
        let h = holder_seminorm(&b, beta)?.value;
        let bound = n.powf(beta / 2.0) * h;
        for q in fam.iter() {
            let m = local_maximal(&b, q, 0.0)?;
            let scale = q.measure().powf(beta / n);
            for c in d.cells(q) {
                let dev = m.values.value(c) - b.value(c);
                let t = dev / scale;
                o.require(dev >= -tol * b.value(c).abs() && !exceeds(t, bound, tol), || {
                    format!("beta={beta}, {}, cell {c}: scaled deviation {t} vs bound {bound}", show(q))
                });
                o.max("max_scaled_over_bound", t / bound);
            }
        }
    }
    Ok(o)
}

fn weighted5(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    let n = ctx.n();
    let d = ctx.domain(ctx.smallest())?;
    let fam = ctx.family(&d)?;
    let one = Weight::new(GridFunction::constant(d.clone(), 1.0)?)?;
    let mut classes = vec![WeightClass::A1];
    classes.extend(ctx.cfg.exponents.p.iter().filter(|&&p| p > 1.0).map(|&p| WeightClass::Ap { p }));
    for &class in &classes {
        let a = muckenhoupt_constant(&one, class, &fam)?.constant;
        o.require((a - 1.0).abs() <= tol, || format!("unit weight has {class:?} constant {a}"));
    }
    o.set("max_reduction_rel_diff", 0.0);
    for k in 0..ctx.cfg.samples {
        let w = Weight::new(generate(d.clone(), &Generator::LognormalWeight { sigma: 1.0 }, ctx.seed(k))?)?;
        for &class in &classes {
            let rep = muckenhoupt_constant(&w, class, &fam)?;
            o.require(rep.constant >= 1.0 - tol, || {
                format!("sample {k}: {class:?} constant {} below 1 on {}", rep.constant, rep.cube.as_ref().map_or(String::new(), show))
            });
            o.min("min_constant", rep.constant);
        }
        let b = ctx.random(&d, k, 16)?;
        for &p in &ctx.cfg.exponents.p {
            let plain = char_statistic(&b, &fam, 0.0, 0.0, p)?;
            let weighted = weighted_char_statistic(&b, &one, p, p, 0.0, &fam)?;
            for (i, (x, y)) in plain.values.iter().zip(&weighted.values).enumerate() {
                let rel = (x - y).abs() / x.abs().max(1e-300);
                if *x != 0.0 {
                    o.require(rel <= 1e-12_f64.max(tol), || format!("sample {k}, p={p}: reduction differs on {}", show(&fam.cubes()[i])));
                    o.max("max_reduction_rel_diff", rel);
                }
            }
        }
    }
    let w = Weight::new(GridFunction::from_fn(d.clone(), |x| if x[0] < 0.5 { 1.0 } else { 4.0 })?)?;
    let b = generate(d.clone(), &Generator::LogSingularity { center: 0.5, amplitude: 1.0 }, 0)?;
    let alpha = n / 4.0;
    let st = weighted_char_statistic(&b, &w, 2.0, 4.0, alpha, &fam)?;
    o.require(st.sup.is_finite(), || "weighted A_{2,4} statistic is not finite".into());
    o.set("apq_statistic", st.sup);
    Ok(o)
}

fn bilinear6(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let tol = ctx.tol();
    let d = ctx.domain(ctx.smallest())?;
    let res = d.res();
    let o0 = (res / 4) as i64;
    let q = d.cube([o0, o0], res / 2)?;
    let units: Vec<Cube> = d.active_cells().iter().map(|&c| d.cell_cube(c)).collect();
    let local = enumerate_cubes(&d, &FamilyPolicy::Anchored, Some(&q))?.union(&CubeFamily::from_cubes(units));
    let chi = GridFunction::indicator(d.clone(), &q);
    let bil = bilinear_maximal(&chi, &chi, &local)?;
    let ones = d.cells(&q).all(|c| bil.value(c) == 1.0);
    o.require(ones, || format!("bilinear(chi, chi) differs from 1 on {}", show(&q)));

    let fam = ctx.family(&d)?;
    o.set("max_commutator_identity_error", 0.0);
    o.set("max_product_bound_ratio", 0.0);
    for k in 0..ctx.cfg.samples {
        let b = ctx.random(&d, k, res)?.scale(3.0);
        let kq = commutator(&b, &chi, 0.0, &local)?;
        let mq = local_maximal(&b, &q, 0.0)?;
        for c in d.cells(&q) {
            let err = (kq.value(c) - (b.value(c) - mq.values.value(c))).abs();
            o.require(err <= 1e-12_f64.max(tol), || format!("sample {k}: commutator identity off by {err} at cell {c}"));
            o.max("max_commutator_identity_error", err);
        }

        let f1 = ctx.random(&d, 1000 + k, res)?;
        let f2 = ctx.random(&d, 2000 + k, res)?;
        let bm = bilinear_maximal(&f1, &f2, &fam)?;
        let (m1, m2) = (global_maximal(&f1, &fam, 0.0)?, global_maximal(&f2, &fam, 0.0)?);
        for &c in d.active_cells() {
            let rhs = m1.value(c) * m2.value(c);
            o.require(!exceeds(bm.value(c), rhs, tol), || format!("sample {k}: bilinear exceeds product at cell {c}"));
            if rhs > 0.0 {
                o.max("max_product_bound_ratio", bm.value(c) / rhs);
            }
        }
        let c1 = GridFunction::constant(d.clone(), 1.5)?;
        let zero = bilinear_commutator(&c1, &c1, &f1, &f2, &fam)?.max_abs();
        let scale = bm.max_abs().max(1.0);
        o.require(zero <= 1e-12 * scale, || format!("sample {k}: constant-symbol bilinear commutator is {zero}"));
    }
    Ok(o)
}

fn eqjn9(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let d = ctx.domain(ctx.smallest())?;
    let q0 = d.full_cube();
    let top = 2f64.powi(ctx.dim() as i32);
    o.set("selected", 0.0);
    o.set("max_generation_measure_over_bound", 0.0);
    o.set("generation_cubes", 0.0);
    for k in 0..ctx.cfg.samples {
        let g = generate(d.clone(), &Generator::LognormalWeight { sigma: 1.5 }, ctx.seed(k))?;
        let tau = 2.0 * g.mean_over(&q0)?;
        let cz = cz_decompose(&g, &q0, tau)?;
        for s in &cz.selected {
            o.require(s.average > tau && s.average <= top * tau * (1.0 + 1e-12), || {
                format!("sample {k}: {} has average {} outside ({tau}, {}]", show(&s.cube), s.average, top * tau)
            });
        }
        o.set("selected", o.measured["selected"].0 + cz.selected.len() as f64);
        o.require(cz.selected_measure() <= g.integral_over(&q0) / tau * (1.0 + 1e-12), || format!("sample {k}: selected measure too large"));

        let f = generate(d.clone(), &Generator::LognormalWeight { sigma: 2.0 }, ctx.seed(1000 + k))?;
        let jn = jn_generations(&f, &q0, 1.0, 2.0, 4)?;
        for (i, gen) in jn.generations.iter().enumerate() {
            o.max("max_generation_measure_over_bound", gen.measure / jn.measure_bound(i + 1));
            o.set("generation_cubes", o.measured["generation_cubes"].0 + gen.cubes.len() as f64);
        }
        o.require(jn.measure_decay_holds(1e-12), || format!("sample {k}: generation measure exceeds tau^-i |Q0|"));
    }
    Ok(o)
}

fn thmr(ctx: &Ctx) -> campanato_core::Result<Outcome> {
    let mut o = Outcome::default();
    let d = ctx.domain(ctx.smallest())?;
    let fam = ctx.family(&d)?;
    o.set("max_excess", f64::NEG_INFINITY);
    for k in 0..ctx.cfg.samples {
        let g = ctx.random(&d, k, d.res())?.scale(5.0);
        let b = global_maximal(&g, &fam, 0.0)?.max_abs() / g.max_abs();
        let rdf = rubio_de_francia(&g, b, 16, &fam)?;
        let mr = global_maximal(&rdf.r, &fam, 0.0)?;
        for &c in d.active_cells() {
            o.require(g.value(c).abs() <= rdf.r.value(c), || format!("sample {k}: |g| exceeds Rg at cell {c}"));
            let rhs = 2.0 * b * rdf.r.value(c) + rdf.tail;
            o.require(mr.value(c) <= rhs, || format!("sample {k}: M(Rg) exceeds 2B Rg + tail at cell {c}"));
            o.max("max_excess", mr.value(c) - rhs);
        }
    }
    Ok(o)
}
