//! `pmeans` command-line front end. Every seeded subcommand is deterministic:
//! the same arguments give byte-identical output.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pmeans::discrete::{
    dirichlet_finite, gem_truncated, poisson_dirichlet, subordinator_increments, AlphaTheta, Subordinator,
    Truncation,
};
use pmeans::partition::{crp_sample, kn_distribution, Composition, PartitionStructure};
use pmeans::pmean::{
    cs_transform_rhs, darling_lamperti_cdf, darling_lamperti_pdf, exact_pmean_moments, AtomicDistribution,
};
use pmeans::sampling::RngStream;
use pmeans::shape::{alpha_critical, discriminant_half, inflection_point, stationary_points};
use pmeans::specialfn::{stable_pdf, stable_ratio_pdf, stable_ratio_power_pdf, talzol_pdf, SeriesControl};
use pmeans::verify::{default_grid, run_cells, CheckConfig, CheckName};

use output::{Format, Sink, Table};

#[derive(Parser, Debug)]
#[command(name = "pmeans", version, about = "Random discrete distributions, partitions and random means")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Number of samples or replicates, where the subcommand draws any.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    theta: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<AlphaTheta> {
        Ok(AlphaTheta::new(self.alpha, self.theta)?)
    }
}

/// Law of X: either `--bernoulli p` or matching `--values` and `--probs` lists.
#[derive(Args, Debug, Clone)]
struct XArgs {
    #[arg(long, conflicts_with_all = ["values", "probs"])]
    bernoulli: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "probs")]
    values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', requires = "values")]
    probs: Option<Vec<f64>>,
}

impl XArgs {
    fn distribution(&self) -> Result<AtomicDistribution> {
        match (&self.bernoulli, &self.values, &self.probs) {
            (Some(p), _, _) => Ok(AtomicDistribution::bernoulli(*p)?),
            (None, Some(v), Some(p)) => Ok(AtomicDistribution::new(v.clone(), p.clone())?),
            _ => bail!("give the law of X with --bernoulli P or with --values and --probs"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Draw random discrete distributions.
    Sample {
        #[command(subcommand)]
        model: SampleModel,
    },
    /// Probability of one set partition with the given block sizes.
    Eppf {
        #[command(flatten)]
        model: ModelArgs,
        /// Block sizes, e.g. 2,1,1.
        #[arg(long)]
        composition: Composition,
    },
    /// Probability of the block sizes in exchangeable random order.
    Ecpf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        composition: Composition,
    },
    /// Law of the number of blocks of a sample of size n.
    Kn {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
    },
    /// Sequential (Chinese restaurant) partitions of [n].
    Crp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
    },
    /// Exact moments of the random mean for a finitely supported X.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        x: XArgs,
        #[arg(long)]
        order: usize,
    },
    /// Tabulate a density on an evenly spaced grid.
    Density {
        #[arg(value_enum)]
        kind: DensityKind,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Mass of the unit atom, for the Lamperti law.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Cauchy-Stieltjes transform E (1 + lambda M)^-theta of the random mean.
    Transform {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        x: XArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        lambda: Vec<f64>,
    },
    /// Data for the stable-ratio density and shape plots.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Run Monte Carlo identity checks; exits non-zero unless every run passes.
    Verify {
        /// Check to run at its default parameters; may be repeated.
        #[arg(long = "check")]
        checks: Vec<CheckName>,
        /// Run every check over its default parameter grid.
        #[arg(long)]
        all: bool,
        /// Shift each check's target parameter, so that a sound check fails.
        #[arg(long)]
        sentinel: bool,
    },
}

#[derive(Subcommand, Debug)]
enum SampleModel {
    /// GEM(alpha, theta) stick-breaking weights.
    Gem {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-8)]
        trunc_tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_atoms: usize,
    },
    /// Dirichlet weights with the listed parameters.
    Dirichlet {
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
    },
    /// Ranked normalized jumps of a stable(alpha) subordinator.
    StableJumps {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-6)]
        trunc_tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_atoms: usize,
    },
    /// Normalized increments of a subordinator over consecutive intervals.
    Subordinator {
        #[arg(value_enum)]
        kind: SubordinatorKind,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<f64>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SubordinatorKind {
    Gamma,
    Stable,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DensityKind {
    /// Random mean of an indicator under PD(alpha, 0).
    Lamperti,
    /// One-sided stable(alpha).
    Stable,
    /// Log of a ratio of independent stable(alpha) variables.
    LogRatio,
    /// Ratio of independent stable(alpha) variables.
    Ratio,
    /// Ratio raised to the power alpha.
    RatioPower,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
#[value(rename_all = "snake_case")]
enum FigureName {
    RatioDensities,
    Discriminant,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check invoked passed (trivially true elsewhere).
fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.run;
    let mut sink = Sink::open(cfg.out.as_deref(), cfg.format)?;
    let mut rng = RngStream::new(cfg.seed, 0);
    let samples = cfg.samples.map(|n| n as usize);
    match cli.cmd {
        Cmd::Sample { model } => {
            let n = samples.unwrap_or(1);
            cmd_sample(&model, n, &mut rng, &mut sink)?;
        }
        Cmd::Eppf { model, composition } => {
            let v = model.params()?.eppf(&composition);
            sink.value("block-size probability of one set partition", "eppf", &composition, v)?;
        }
        Cmd::Ecpf { model, composition } => {
            let v = model.params()?.ecpf(&composition);
            sink.value("probability of block sizes in exchangeable random order", "ecpf", &composition, v)?;
        }
        Cmd::Kn { model, n } => {
            let dist = kn_distribution(&model.params()?, n)?;
            let mut t = Table::new("law of the number of blocks among n draws", &["k", "probability"]);
            for (k, p) in dist.iter().enumerate().skip(1) {
                t.row(vec![json!(k), json!(p)]);
            }
            sink.table(&t)?;
        }
        Cmd::Crp { model, n } => {
            let params = model.params()?;
            let mut t = Table::new("block sizes of sequential partitions in order of appearance", &["sample", "blocks"]);
            for i in 0..samples.unwrap_or(1) {
                let state = crp_sample(&params, n, &mut rng)?;
                let sizes: Vec<String> = state.sizes().iter().map(|s| s.to_string()).collect();
                t.row(vec![json!(i), json!(sizes.join(" "))]);
            }
            sink.table(&t)?;
        }
        Cmd::Moments { model, x, order } => {
            let dist = x.distribution()?;
            let m = exact_pmean_moments(&model.params()?, &dist.moments(order), order)?;
            let mut t = Table::new("moments of the random mean summed over partitions of [n]", &["n", "moment"]);
            for j in 1..=order {
                t.row(vec![json!(j), json!(m.get(j))]);
            }
            sink.table(&t)?;
        }
        Cmd::Density { kind, alpha, p, from, to, points } => {
            cmd_density(kind, alpha, p, from, to, points, &mut sink)?;
        }
        Cmd::Transform { model, x, lambda } => {
            let params = model.params()?;
            let dist = x.distribution()?;
            let mut t = Table::new("E (1 + lambda M)^-theta from the law of X", &["lambda", "transform"]);
            for l in lambda {
                t.row(vec![json!(l), json!(cs_transform_rhs(params, &dist, l)?)]);
            }
            sink.table(&t)?;
        }
        Cmd::Figure { name, points } => cmd_figure(name, points, &mut sink)?,
        Cmd::Verify { checks, all, sentinel } => {
            return cmd_verify(&checks, all, sentinel, cfg.seed, samples, &mut sink);
        }
    }
    sink.finish()?;
    Ok(true)
}

fn cmd_sample(model: &SampleModel, n: usize, rng: &mut RngStream, sink: &mut Sink) -> Result<()> {
    for i in 0..n {
        let s = match model {
            SampleModel::Gem { model, trunc_tol, max_atoms } => {
                let trunc = Truncation { residual_tol: *trunc_tol, tail_sd_tol: None, max_atoms: *max_atoms };
                gem_truncated(model.params()?, &trunc, rng)?
            }
            SampleModel::Dirichlet { theta } => dirichlet_finite(theta, rng)?,
            SampleModel::StableJumps { alpha, trunc_tol, max_atoms } => {
                let trunc = Truncation { residual_tol: *trunc_tol, tail_sd_tol: None, max_atoms: *max_atoms };
                poisson_dirichlet(AlphaTheta::new(*alpha, 0.0)?, &trunc, rng)?
            }
            SampleModel::Subordinator { kind, alpha, lengths } => {
                let kind = match kind {
                    SubordinatorKind::Gamma => Subordinator::Gamma,
                    SubordinatorKind::Stable => Subordinator::Stable { alpha: *alpha },
                };
                subordinator_increments(kind, lengths, rng)?
            }
        };
        sink.sample(i, &s)?;
    }
    sink.finish()
}

fn grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![from];
    }
    (0..points).map(|i| from + (to - from) * i as f64 / (points - 1) as f64).collect()
}

fn cmd_density(
    kind: DensityKind,
    alpha: f64,
    p: f64,
    from: Option<f64>,
    to: Option<f64>,
    points: usize,
    sink: &mut Sink,
) -> Result<()> {
    let ctl = SeriesControl::default();
    let (lo, hi, title) = match kind {
        DensityKind::Lamperti => (0.01, 0.99, "density and distribution function of the PD(alpha, 0) mean of an indicator"),
        DensityKind::Stable => (0.05, 5.0, "one-sided stable density from its series"),
        DensityKind::LogRatio => (-10.0, 10.0, "density of the log of a ratio of independent stable variables"),
        DensityKind::Ratio => (0.05, 5.0, "density of a ratio of independent stable variables"),
        DensityKind::RatioPower => (0.05, 5.0, "density of the stable ratio raised to the power alpha"),
    };
    let (lo, hi) = (from.unwrap_or(lo), to.unwrap_or(hi));
    if !(lo < hi) {
        bail!("empty grid: --from must be below --to");
    }
    let cols: &[&str] = match kind {
        DensityKind::Lamperti => &["x", "density", "cdf"],
        _ => &["x", "density"],
    };
    let mut t = Table::new(title, cols);
    for x in grid(lo, hi, points) {
        let row = match kind {
            DensityKind::Lamperti => {
                vec![json!(x), json!(darling_lamperti_pdf(alpha, p, x)?), json!(darling_lamperti_cdf(alpha, p, x)?)]
            }
            DensityKind::Stable => vec![json!(x), json!(stable_pdf(alpha, x, ctl)?)],
            DensityKind::LogRatio => vec![json!(x), json!(talzol_pdf(alpha, x)?)],
            DensityKind::Ratio => vec![json!(x), json!(stable_ratio_pdf(alpha, x)?)],
            DensityKind::RatioPower => vec![json!(x), json!(stable_ratio_power_pdf(alpha, x)?)],
        };
        t.row(row);
    }
    sink.table(&t)
}

fn cmd_figure(name: FigureName, points: usize, sink: &mut Sink) -> Result<()> {
    match name {
        FigureName::RatioDensities => {
            let mut t = Table::new(
                "densities of R^alpha and R, R the ratio of independent stable(alpha) variables, alpha = k/8",
                &["alpha", "x", "ratio_power_density", "ratio_density"],
            );
            for k in 1..8 {
                let alpha = k as f64 / 8.0;
                for i in 1..=points {
                    let x = 3.0 * i as f64 / points as f64;
                    t.row(vec![
                        json!(alpha),
                        json!(x),
                        json!(stable_ratio_power_pdf(alpha, x)?),
                        json!(stable_ratio_pdf(alpha, x)?),
                    ]);
                }
            }
            sink.table(&t)
        }
        FigureName::Discriminant => {
            let ac = alpha_critical();
            let mut t = Table::new(
                "half discriminant cos^2(alpha pi) + alpha^2 - 1 with the local minimum and maximum of the ratio density",
                &["alpha", "half_discriminant", "r_minus", "r_plus"],
            );
            for a in grid(ac, 1.0, points + 1).into_iter().take(points) {
                let (rm, rp) = if a == ac {
                    let r = inflection_point();
                    (r, r)
                } else {
                    stationary_points(a).with_context(|| format!("no stationary points at alpha = {a}"))?
                };
                t.row(vec![json!(a), json!(discriminant_half(a)), json!(rm), json!(rp)]);
            }
            sink.table(&t)
        }
    }
}

fn cmd_verify(
    checks: &[CheckName],
    all: bool,
    sentinel: bool,
    seed: u64,
    samples: Option<usize>,
    sink: &mut Sink,
) -> Result<bool> {
    if !all && checks.is_empty() {
        bail!("name a check with --check or pass --all");
    }
    let configure = |cfg: CheckConfig| {
        let cfg = cfg.with_seed(seed);
        let cfg = match samples {
            Some(n) => cfg.with_samples(n),
            None => cfg,
        };
        if sentinel {
            cfg.sentinel()
        } else {
            cfg
        }
    };
    let mut cells = Vec::new();
    if all {
        for c in CheckName::ALL {
            cells.extend(default_grid(c).into_iter().map(|cfg| (c, configure(cfg))));
        }
    } else {
        cells.extend(checks.iter().map(|&c| (c, configure(CheckConfig::default_for(c)))));
    }
    let reports = run_cells(&cells)?;
    let mut ok = true;
    for r in &reports {
        ok &= r.passed;
        sink.report(r)?;
    }
    sink.finish()?;
    Ok(ok)
}

