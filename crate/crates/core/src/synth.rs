//! Seeded generators for the canonical test functions and weights.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Domain, GridFunction};

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Constant {
        value: f64,
    },
    /// −1 below the midpoint of axis 0, +1 above.
    Step,
    /// `|x − c|^β` with `c` the domain center.
    PowerCusp {
        beta: f64,
    },
    /// `a·log(1/(|x − x₀| + h))`, `h` half a cell width, `x₀ = center` along every axis.
    LogSingularity {
        #[serde(default = "half")]
        center: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Independent ±1 on `pieces` equal blocks per axis.
    RandomSigns {
        pieces: usize,
    },
    /// Independent uniform values in `[−1, 1)` on `pieces` equal blocks per axis.
    RandomUniform {
        pieces: usize,
    },
    /// `exp(σ Z)` with independent standard normal `Z` per cell.
    LognormalWeight {
        sigma: f64,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Constant { .. } => "constant",
            Generator::Step => "step",
            Generator::PowerCusp { .. } => "power_cusp",
            Generator::LogSingularity { .. } => "log_singularity",
            Generator::RandomSigns { .. } => "random_signs",
            Generator::RandomUniform { .. } => "random_uniform",
            Generator::LognormalWeight { .. } => "lognormal_weight",
        }
    }
}

fn distance_to(dom: &Domain, x: [f64; 2], c: f64) -> f64 {
    (0..dom.dim())
        .map(|a| (x[a] - (dom.lower()[a] + c * dom.side())).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn block_of(dom: &Domain, cell: usize, pieces: usize) -> usize {
    let idx = dom.multi_index(cell);
    let k = |i: usize| i * pieces / dom.res();
    if dom.dim() == 2 {
        k(idx[0]) * pieces + k(idx[1])
    } else {
        k(idx[0])
    }
}

/// Sample the generator on `domain`; deterministic in `seed`.
pub fn generate(domain: Arc<Domain>, generator: &Generator, seed: u64) -> Result<GridFunction> {
    if domain.res() < 2 {
        return Err(invalid("generators need at least two cells per axis"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *generator {
        Generator::Constant { value } => GridFunction::constant(domain, value),
        Generator::Step => {
            let mid = domain.lower()[0] + 0.5 * domain.side();
            GridFunction::from_fn(domain, |x| if x[0] < mid { -1.0 } else { 1.0 })
        }
        Generator::PowerCusp { beta } => {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(invalid(format!("beta must lie in (0, 1], got {beta}")));
            }
            let d = Arc::clone(&domain);
            GridFunction::from_fn(domain, |x| distance_to(&d, x, 0.5).powf(beta))
        }
        Generator::LogSingularity { center, amplitude } => {
            let h = 0.5 * domain.cell_width();
            let d = Arc::clone(&domain);
            GridFunction::from_fn(domain, |x| amplitude * (1.0 / (distance_to(&d, x, center) + h)).ln())
        }
        Generator::RandomSigns { pieces } | Generator::RandomUniform { pieces } => {
            if pieces == 0 || pieces > domain.res() {
                return Err(invalid(format!("pieces must lie in 1..={}, got {pieces}", domain.res())));
            }
            let blocks = pieces.pow(domain.dim() as u32);
            let signs = matches!(generator, Generator::RandomSigns { .. });
            let vals: Vec<f64> = (0..blocks)
                .map(|_| {
                    if signs {
                        if rng.random_bool(0.5) {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect();
            let samples = domain.active_cells().iter().map(|&c| vals[block_of(&domain, c, pieces)]).collect();
            GridFunction::new(domain, samples)
        }
        Generator::LognormalWeight { sigma } => {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(invalid(format!("sigma must be non-negative, got {sigma}")));
            }
            let samples = (0..domain.active_count())
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    (sigma * z).exp()
                })
                .collect();
            GridFunction::new(domain, samples)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(res: usize) -> Arc<Domain> {
        Arc::new(Domain::unit(1, res).unwrap())
    }

    #[test]
    fn constant_and_cusp() {
        let d = line(16);
        let c = generate(d.clone(), &Generator::Constant { value: 3.0 }, 0).unwrap();
        assert!(c.samples().iter().all(|&v| v == 3.0));
        let f = generate(d.clone(), &Generator::PowerCusp { beta: 0.5 }, 0).unwrap();
        for (i, v) in f.samples().into_iter().enumerate() {
            let x = (i as f64 + 0.5) / 16.0;
            assert!((v - (x - 0.5).abs().sqrt()).abs() < 1e-15);
        }
        assert!(generate(d, &Generator::PowerCusp { beta: 1.5 }, 0).is_err());
    }

    #[test]
    fn random_signs_deterministic() {
        let d = line(32);
        let g = Generator::RandomSigns { pieces: 8 };
        let a = generate(d.clone(), &g, 11).unwrap().samples();
        let b = generate(d.clone(), &g, 11).unwrap().samples();
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| v == 1.0 || v == -1.0));
        assert!(a.chunks(4).all(|w| w.iter().all(|&v| v == w[0])));
    }

    #[test]
    fn log_singularity_clamped() {
        let d = line(8);
        let f = generate(d, &Generator::LogSingularity { center: 0.5, amplitude: 1.0 }, 0).unwrap();
        // nearest centers sit half a cell from the singularity
        let h: f64 = 1.0 / 16.0;
        assert!((f.value(3) - (1.0 / (2.0 * h)).ln()).abs() < 1e-14);
    }

    #[test]
    fn lognormal_positive() {
        let d = Arc::new(Domain::unit(2, 8).unwrap());
        let w = generate(d, &Generator::LognormalWeight { sigma: 0.7 }, 5).unwrap();
        assert!(w.samples().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn resolution_too_small() {
        assert!(generate(line(1), &Generator::Step, 0).is_err());
    }
}
