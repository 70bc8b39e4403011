use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use campanato_cli::{
    all_pass, emit_function, emit_report, generator_from_parts, ingest, parse_family, run_suite, synthesize, CliError,
    ReportFormat, SuiteConfig, CHECKS, OUTPUT_DIR_ENV,
};
use campanato_core::czd::{cz_decompose, default_thresholds, distribution, fit_exponential_decay, jn_generations, DEFAULT_TAU};
use campanato_core::io::{profile_csv, Format};
use campanato_core::maximal::{char_statistic, global_maximal};
use campanato_core::seminorms::{seminorm, Normalization, SeminormKind, SeminormSpec};
use campanato_core::weights::{muckenhoupt_constant, measure_comparison, reverse_holder_exponent, Weight, WeightClass};
use campanato_core::{enumerate_cubes, CubeFamily, GridFunction};

#[derive(Parser)]
#[command(name = "campanato", version, about = "Discrete Morrey-Campanato seminorms, maximal operators and weight checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one quantity on a sampled function.
    Compute {
        #[command(subcommand)]
        what: Compute,
    },
    /// Run the check suite and write reports.
    Suite(SuiteArgs),
    /// Sample a canonical test function and write it to a file.
    Generate(GenerateArgs),
    /// List registered check tags.
    Checks,
}

#[derive(Args)]
struct Input {
    /// Function file (CSV or JSON).
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    /// Cube family: dyadic, anchored, sliding:STRIDE:L1,L2 or centered:K1,K2.
    #[arg(long, default_value = "dyadic")]
    family: String,
}

impl Input {
    fn load(&self) -> Result<(GridFunction, CubeFamily), CliError> {
        let f = ingest(&self.input, self.format)?;
        let fam = enumerate_cubes(f.domain(), &parse_family(&self.family)?, None)?;
        Ok((f, fam))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    A1,
    Ap,
    Apq,
}

#[derive(Subcommand)]
enum Compute {
    Seminorm {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "barred")]
        kind: SeminormKind,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Defaults to the dimension, giving the averaged (BMO-type) scale.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value = "volume")]
        normalization: Normalization,
        /// Include every per-cube value.
        #[arg(long)]
        per_cube: bool,
    },
    Maximal {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Write the maximal function here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Czd {
        #[command(flatten)]
        input: Input,
        /// Stopping level for the decomposition of |f|; defaults to 2 avg|f|.
        #[arg(long)]
        level: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Write the distribution profile of |f - |f|_Q| as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    Weight {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "ap")]
        class: ClassArg,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
        /// Reverse Hölder constant; reports the largest exponent from a fixed grid.
        #[arg(long)]
        reverse_holder: Option<f64>,
        /// Estimate measure-comparison exponents with this seed.
        #[arg(long)]
        comparison_seed: Option<u64>,
    },
}

#[derive(Args)]
struct SuiteArgs {
    /// TOML or JSON suite configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated check tags, or `all`.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    grid_sizes: Option<Vec<usize>>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    min_r2: Option<f64>,
    #[arg(long)]
    refinement: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Report formats to write.
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    report_format: Vec<ReportFormat>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    value: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    center: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    pieces: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    format: Option<Format>,
}

fn print_json(v: &serde_json::Value) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn compute(what: Compute) -> Result<(), CliError> {
    match what {
        Compute::Seminorm { input, kind, p, lambda, normalization, per_cube } => {
            let (f, fam) = input.load()?;
            let lambda = lambda.unwrap_or(f.domain().dim() as f64);
            let spec = SeminormSpec::new(kind, p, lambda, normalization)?;
            print_json(&seminorm(&f, &spec, &fam)?.to_json(per_cube))
        }
        Compute::Maximal { input, alpha, beta, p, out } => {
            let (f, fam) = input.load()?;
            let m = global_maximal(&f, &fam, alpha)?;
            let stat = char_statistic(&f, &fam, alpha, beta, p)?;
            if let Some(path) = out {
                emit_function(&m, &path, None)?;
            }
            print_json(&serde_json::json!({ "max": m.max_abs(), "char_statistic": stat }))
        }
        Compute::Czd { input, level, tau, p, depth, profile } => {
            let (f, _) = input.load()?;
            let q0 = f.domain().full_cube();
            let g = f.abs();
            let level = match level {
                Some(l) => l,
                None => 2.0 * g.mean_over(&q0)?,
            };
            let cz = cz_decompose(&g, &q0, level)?;
            let jn = jn_generations(&f, &q0, p, tau, depth)?;
            let r = f.abs_mean_over(&q0)?;
            let dev = f.map(|v| (v - r).abs());
            let ts = default_thresholds(&dev, &q0)?;
            let prof = distribution(&dev, &q0, &ts)?;
            let fit = fit_exponential_decay(&prof, ts[0], ts[ts.len() - 1]).ok();
            if let Some(path) = profile {
                std::fs::write(path, profile_csv(&prof))?;
            }
            print_json(&serde_json::json!({
                "decomposition": cz,
                "generations": jn,
                "off_generation_bounds": jn.off_generation_bounds(&f)?,
                "fit": fit,
            }))
        }
        Compute::Weight { input, class, p, q, reverse_holder, comparison_seed } => {
            let (f, fam) = input.load()?;
            let w = Weight::new(f)?;
            let class = match class {
                ClassArg::A1 => WeightClass::A1,
                ClassArg::Ap => WeightClass::Ap { p },
                ClassArg::Apq => WeightClass::Apq { p, q: q.unwrap_or(p) },
            };
            let mut rep = muckenhoupt_constant(&w, class, &fam)?;
            if let Some(c) = reverse_holder {
                let grid: Vec<f64> = (1..=40).map(|k| 1.0 + 0.05 * k as f64).collect();
                rep.reverse_holder = reverse_holder_exponent(&w, &fam, c, &grid)?;
            }
            if let Some(seed) = comparison_seed {
                rep.comparison = Some(measure_comparison(&w, &fam, seed)?);
            }
            print_json(&serde_json::to_value(&rep)?)
        }
    }
}

fn suite_config(a: &SuiteArgs) -> Result<SuiteConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(c) = &a.checks {
        cfg.checks = if c.len() == 1 && c[0] == "all" { CHECKS.iter().map(|c| c.tag.to_string()).collect() } else { c.clone() };
    }
    if let Some(v) = a.dimension {
        cfg.dimension = v;
    }
    if let Some(v) = &a.grid_sizes {
        cfg.grid_sizes = v.clone();
    }
    if let Some(v) = &a.family {
        cfg.family = parse_family(v)?;
    }
    let e = &mut cfg.exponents;
    for (src, dst) in [(&a.p, &mut e.p), (&a.lambda, &mut e.lambda), (&a.alpha, &mut e.alpha), (&a.beta, &mut e.beta)] {
        if let Some(v) = src {
            *dst = v.clone();
        }
    }
    let t = &mut cfg.tolerances;
    t.exact = a.tolerance.unwrap_or(t.exact);
    t.min_r2 = a.min_r2.unwrap_or(t.min_r2);
    t.refinement = a.refinement.unwrap_or(t.refinement);
    cfg.samples = a.samples.unwrap_or(cfg.samples);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    if a.output_dir.is_some() {
        cfg.output_dir = a.output_dir.clone();
    }
    Ok(cfg)
}

fn suite(a: SuiteArgs) -> Result<bool, CliError> {
    let cfg = suite_config(&a)?;
    let results = run_suite(&cfg)?;
    for r in &results {
        println!("{} ({:.2}s)", r.summary(), r.runtime.unwrap_or(0.0));
    }
    if let Some(dir) = &cfg.output_dir {
        for &fmt in &a.report_format {
            emit_report(&results, fmt, &dir.join(format!("report.{}", fmt.extension())))?;
        }
    }
    Ok(all_pass(&results))
}

fn generate(a: GenerateArgs) -> Result<(), CliError> {
    let g = generator_from_parts(&a.kind, a.value, a.beta, a.center, a.amplitude, a.pieces, a.sigma)?;
    let f = synthesize(&g, a.dim, a.side, a.res, a.seed)?;
    emit_function(&f, Path::new(&a.out), a.format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Compute { what } => compute(what).map(|_| true),
        Command::Suite(a) => suite(a),
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Checks => {
            for c in CHECKS {
                println!("{:<10} {}", c.tag, c.description);
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
