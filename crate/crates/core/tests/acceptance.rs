//! Acceptance run: ten criteria, one PASS/FAIL line each. Built without the
//! libtest harness so the lines always print; exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pmeans::discrete::{
    compose, dirichlet_finite, gem_truncated, poisson_dirichlet, subordinator_increments,
    AlphaTheta, RandomDiscreteSample, Subordinator, Truncation,
};
use pmeans::numeric::mean_and_se;
use pmeans::partition::{compositions, consistency_residual, PartitionStructure};
use pmeans::pmean::{
    cs_transform_rhs, darling_lamperti_cdf, darling_lamperti_pdf_split, exact_pmean_moments, pgf_kn_moment,
    pmean_of, AtomicDistribution,
};
use pmeans::quadrature::tanh_sinh;
use pmeans::sampling::{chunked, RngStream};
use pmeans::shape::{alpha_critical, derivative_sign_changes, inflection_point};
use pmeans::specialfn::stable_ratio_power_pdf;
use pmeans::verify::{
    ks_statistic, ks_two_sample, run_check, CheckConfig, CheckName, SE_MULT, MC_TAIL_SD,
};
use pmeans::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn at(a: f64, t: f64) -> AlphaTheta {
    AlphaTheta::new(a, t).expect("valid parameters")
}

/// The parameter grid of the exact criteria: three finite-regime models, three
/// Dirichlet models and nine two-parameter models.
fn exact_grid() -> Vec<AlphaTheta> {
    let mut g: Vec<AlphaTheta> = (2..=4).map(|m| AlphaTheta::finite(m, 1.0).expect("finite model")).collect();
    g.extend([0.5, 1.0, 2.0].map(|t| at(0.0, t)));
    for a in [0.25, 0.5, 0.75] {
        g.extend([-a / 2.0, 0.5, 2.0].map(|t| at(a, t)));
    }
    g
}

fn c1_exact_partitions() -> Result<Outcome> {
    let start = Instant::now();
    let (mut worst_norm, mut worst_cons) = (0.0f64, 0.0f64);
    for params in exact_grid() {
        for n in 1..=8 {
            let mut total = 0.0;
            for c in compositions(n) {
                total += params.ecpf(&c);
                worst_cons = worst_cons.max(consistency_residual(&params, &c).abs());
            }
            worst_norm = worst_norm.max((total - 1.0).abs());
        }
    }
    let t = start.elapsed();
    let ok = worst_norm <= 1e-12 && worst_cons <= 1e-12 && t < Duration::from_secs(10);
    Ok(outcome(ok, format!("max |sum ECPF - 1| = {worst_norm:.1e}, max consistency residual = {worst_cons:.1e}, {t:.2?}")))
}

fn c2_moments_and_pgf() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for params in exact_grid() {
        for v in [0.3, 0.7] {
            let x = AtomicDistribution::bernoulli(v)?;
            let m = exact_pmean_moments(&params, &x.moments(10), 10)?;
            for n in 1..=10 {
                worst = worst.max((m.get(n) - pgf_kn_moment(&params, v, n)?).abs());
            }
        }
    }
    let t = start.elapsed();
    Ok(outcome(worst <= 1e-12 && t < Duration::from_secs(10), format!("max difference {worst:.1e}, {t:.2?}")))
}

fn c3_dirichlet_beta() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = CheckConfig { seed: 7, theta: 2.0, p: 0.3, ..CheckConfig::default_for(CheckName::DirichletBeta) }
        .with_samples(200_000);
    let r = run_check(CheckName::DirichletBeta, &cfg)?;
    let t = start.elapsed();
    let ok = r.statistic <= 0.01 && t < Duration::from_secs(60);
    Ok(outcome(ok, format!("KS = {:.5} (limit 0.01), {t:.2?}", r.statistic)))
}

fn c4_lamperti() -> Result<Outcome> {
    let mut worst_norm = 0.0f64;
    for alpha in [0.25, 0.5, 0.75] {
        for p in [0.2, 0.5, 0.8] {
            let f = |_x: f64, u: f64, w: f64| darling_lamperti_pdf_split(alpha, p, u, w).unwrap_or(f64::NAN);
            worst_norm = worst_norm.max((tanh_sinh(f, 0.0, 1.0, 1e-12)?.value - 1.0).abs());
        }
    }
    let mut details = vec![format!("max |mass - 1| = {worst_norm:.1e}")];
    let mut ok = worst_norm <= 1e-8;
    let rng = RngStream::new(2024, 4);
    for (i, &(alpha, p)) in [(0.5, 0.5), (0.75, 0.3)].iter().enumerate() {
        let kind = Subordinator::Stable { alpha };
        let ys = chunked(&rng.split(i as u64), 200_000, 8192, |r| {
            Ok(subordinator_increments(kind, &[p, 1.0 - p], r)?.weights()[0])
        })?;
        // distribution function by quadrature of the density, tabulated at
        // u = sin^2(v) for evenly spaced v so knots crowd both steep endpoints,
        // then interpolated linearly in v
        let knots = 2001;
        let step = std::f64::consts::FRAC_PI_2 / (knots - 1) as f64;
        let mut table = vec![0.0; knots];
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            let v = k as f64 * step;
            *slot = if k == knots - 1 {
                1.0
            } else {
                let (u, w) = (v.sin().powi(2), v.cos().powi(2));
                let g = |x: f64, from_zero: f64, _: f64| {
                    darling_lamperti_pdf_split(alpha, p, from_zero, w + (u - x)).unwrap_or(f64::NAN)
                };
                tanh_sinh(g, 0.0, u, 1e-10)?.value
            };
        }
        let cdf = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            if u >= 1.0 {
                return 1.0;
            }
            let pos = u.sqrt().asin() / step;
            let k = (pos.floor() as usize).min(knots - 2);
            let t = pos - k as f64;
            table[k] * (1.0 - t) + table[k + 1] * t
        };
        let ks = ks_statistic(&ys, cdf);
        let closed = ks_statistic(&ys, |u| darling_lamperti_cdf(alpha, p, u).unwrap_or(f64::NAN));
        ok &= ks <= 0.01;
        details.push(format!("KS({alpha}, {p}) = {ks:.5} (closed form {closed:.5})"));
    }
    Ok(outcome(ok, details.join(", ")))
}

fn c5_transform() -> Result<Outcome> {
    let x = AtomicDistribution::bernoulli(0.4)?;
    let lambdas = [0.5, 1.0, 4.0];
    let mut ok = true;
    let mut worst = 0.0f64;
    let rng = RngStream::new(5, 5);
    for (i, &(a, t)) in [(0.5, 0.5), (0.5, 2.0), (0.25, 1.0)].iter().enumerate() {
        let params = at(a, t);
        let trunc = Truncation::for_means(MC_TAIL_SD);
        let means = chunked(&rng.split(i as u64), 200_000, 8192, |r| {
            let pd = gem_truncated(params, &trunc, r)?;
            Ok(pmean_of(&pd, |r: &mut RngStream| if r.bernoulli(0.4) { 1.0 } else { 0.0 }, 0.4, r))
        })?;
        for &l in &lambdas {
            let vals: Vec<f64> = means.iter().map(|m| (1.0 + l * m).powf(-t)).collect();
            let (mean, se) = mean_and_se(&vals);
            let target = cs_transform_rhs(params, &x, l)?;
            let z = (mean - target).abs() / se;
            worst = worst.max(z);
            ok &= z <= SE_MULT;
        }
    }
    Ok(outcome(ok, format!("largest deviation {worst:.2} standard errors over 9 cells")))
}

fn largest(s: &RandomDiscreteSample) -> f64 {
    s.weights().iter().copied().fold(0.0, f64::max)
}

fn c6_composition() -> Result<Outcome> {
    let n = 100_000;
    let cfg = CheckConfig { alpha: 0.5, theta: 1.0, ..CheckConfig::default_for(CheckName::CompositionRule) }
        .with_samples(n)
        .with_seed(6);
    let r = run_check(CheckName::CompositionRule, &cfg)?;
    // largest atom of the composed law against the PD(1/2, 1) largest atom
    let outer = at(0.0, 1.0);
    let inner = at(0.5, 0.0);
    let rng = RngStream::new(6, 66);
    // the largest atom is exact whenever it outweighs the untracked mass
    let trunc = Truncation::residual(1e-2);
    let composed = chunked(&rng.split(0), n, 8192, |r| {
        let pd = gem_truncated(outer, &trunc, r)?;
        Ok(largest(&compose(&pd, |_, rr| gem_truncated(inner, &trunc, rr), r)?))
    })?;
    let direct = chunked(&rng.split(1), n, 8192, |r| Ok(largest(&poisson_dirichlet(at(0.5, 1.0), &trunc, r)?)))?;
    let ks_top = ks_two_sample(&composed, &direct);
    let ok = r.statistic <= 0.015 && ks_top <= 0.015;
    Ok(outcome(ok, format!("KS of means = {:.5}, KS of largest atom = {ks_top:.5} (limit 0.015)", r.statistic)))
}

fn c7_stable_calculus() -> Result<Outcome> {
    let mut ok = true;
    let mut details = Vec::new();
    for &(alpha, rr) in &[(0.5, 0.5), (0.7, -0.4)] {
        let cfg = CheckConfig { alpha, r: rr, ..CheckConfig::default_for(CheckName::MellinStable) }.with_seed(71);
        let rep = run_check(CheckName::MellinStable, &cfg)?;
        ok &= rep.passed;
        details.push(format!("Mellin({alpha}, {rr}) {:.1e} <= {:.1e}", rep.statistic, rep.threshold));
    }
    for &xv in &[0.5, 1.0, 2.0] {
        let cfg = CheckConfig { alpha: 0.6, x: xv, ..CheckConfig::default_for(CheckName::MlSurvival) }
            .with_samples(1_000_000)
            .with_seed(72);
        let rep = run_check(CheckName::MlSurvival, &cfg)?;
        ok &= rep.statistic <= 0.01;
        details.push(format!("survival at {xv}: {:.1e}", rep.statistic));
    }
    Ok(outcome(ok, details.join(", ")))
}

fn c8_figure() -> Result<Outcome> {
    let ac = alpha_critical();
    let infl = inflection_point();
    let mut ok = (ac - 0.736484).abs() <= 1e-5 && (infl - 0.278018).abs() <= 1e-5;
    let mut bimodal = Vec::new();
    for k in 1..8 {
        let alpha = k as f64 / 8.0;
        let changes = derivative_sign_changes(alpha, 1e-3, 20.0, 20_000)?;
        if changes == 2 {
            bimodal.push(alpha);
        }
        ok &= changes == if k >= 6 { 2 } else { 0 };
    }
    // mode of R^alpha at sin((alpha - 1/2) pi) for alpha = 3/4
    let mode = golden_max(|x| stable_ratio_power_pdf(0.75, x).unwrap_or(f64::NAN), 0.3, 1.2);
    ok &= (mode - (0.25 * std::f64::consts::PI).sin()).abs() < 1e-5;
    Ok(outcome(ok, format!("alpha_c = {ac:.7}, inflection = {infl:.7}, bimodal at {bimodal:?}, mode = {mode:.6}")))
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn c9_convex_order() -> Result<Outcome> {
    let n = 100_000;
    let rng = RngStream::new(9, 9);
    let trunc = Truncation::for_means(MC_TAIL_SD);
    let mut ok = true;
    let mut details = Vec::new();

    // mean preservation for three kinds of random discrete distribution
    let x = AtomicDistribution::new(vec![-1.0, 0.5, 2.0], vec![0.2, 0.5, 0.3])?;
    let ex = x.mean();
    let xs = |r: &mut RngStream| x.sample(r);
    let mut worst = 0.0f64;
    for (i, kind) in ["gem", "dirichlet", "finite"].iter().enumerate() {
        let ys = chunked(&rng.split(i as u64), n, 8192, |r| {
            let pd = match *kind {
                "gem" => gem_truncated(at(0.5, 1.0), &trunc, r)?,
                "dirichlet" => gem_truncated(at(0.0, 2.0), &trunc, r)?,
                _ => dirichlet_finite(&[0.5; 4], r)?,
            };
            Ok(pmean_of(&pd, xs, ex, r))
        })?;
        let (m, se) = mean_and_se(&ys);
        worst = worst.max((m - ex).abs() / se);
    }
    ok &= worst <= SE_MULT;
    details.push(format!("mean within {worst:.2} se"));

    // convex contraction for an indicator
    let p = 0.3;
    let bern = |r: &mut RngStream| if r.bernoulli(p) { 1.0 } else { 0.0 };
    let model = at(0.5, 1.0);
    let means = chunked(&rng.split(10), n, 8192, |r| Ok(pmean_of(&gem_truncated(model, &trunc, r)?, bern, p, r)))?;
    let tests: Vec<Box<dyn Fn(f64) -> f64>> = [0.25, 0.5, 0.75]
        .iter()
        .flat_map(|&a| -> [Box<dyn Fn(f64) -> f64>; 2] { [Box::new(move |v: f64| (v - a).abs()), Box::new(move |v: f64| (v - a).max(0.0))] })
        .collect();
    let mut contraction = true;
    for phi in &tests {
        let vals: Vec<f64> = means.iter().map(|&m| phi(m)).collect();
        let (m, se) = mean_and_se(&vals);
        let bound = (1.0 - p) * phi(0.0) + p * phi(1.0);
        contraction &= m <= bound + SE_MULT * se;
    }
    ok &= contraction;
    details.push(format!("convex contraction {}", if contraction { "holds" } else { "violated" }));

    // second moment of a centred X
    let xc = AtomicDistribution::new(vec![-1.0, 0.0, 2.0], vec![0.4, 0.4, 0.2])?;
    let xcs = |r: &mut RngStream| xc.sample(r);
    let sq = chunked(&rng.split(11), n, 8192, |r| {
        let m = pmean_of(&gem_truncated(model, &trunc, r)?, xcs, 0.0, r);
        Ok(m * m)
    })?;
    let (m2, se2) = mean_and_se(&sq);
    // E sum P_i^2 is the chance two draws share an atom
    let target = xc.moment(2) * model.eppf_parts(&[2]);
    let z2 = (m2 - target).abs() / se2;
    ok &= z2 <= SE_MULT;
    details.push(format!("second moment within {z2:.2} se"));

    // refinement: splitting atoms of GEM(0, 1) by GEM(1/2, 0)
    let outer = at(0.0, 1.0);
    let inner = at(0.5, 0.0);
    let coarse = chunked(&rng.split(12), n, 8192, |r| Ok(pmean_of(&gem_truncated(outer, &trunc, r)?, bern, p, r)))?;
    let fine = chunked(&rng.split(13), n, 8192, |r| {
        let pd = gem_truncated(outer, &trunc, r)?;
        let c = compose(&pd, |_, rr| gem_truncated(inner, &trunc, rr), r)?;
        Ok(pmean_of(&c, bern, p, r))
    })?;
    let mut refine = true;
    for phi in &tests {
        let (mf, sf) = mean_and_se(&fine.iter().map(|&m| phi(m)).collect::<Vec<_>>());
        let (mc, sc) = mean_and_se(&coarse.iter().map(|&m| phi(m)).collect::<Vec<_>>());
        refine &= mf <= mc + SE_MULT * (sf * sf + sc * sc).sqrt();
    }
    ok &= refine;
    details.push(format!("refinement order {}", if refine { "holds" } else { "violated" }));
    Ok(outcome(ok, details.join(", ")))
}

fn c10_sentinels() -> Result<Outcome> {
    let mut caught = Vec::new();
    let mut missed = Vec::new();
    for c in CheckName::ALL {
        let r = run_check(c, &CheckConfig::default_for(c).sentinel())?;
        if r.passed {
            missed.push(c.as_str());
        } else {
            caught.push(c.as_str());
        }
    }
    Ok(outcome(missed.is_empty(), format!("{} of {} sentinels fail as they should; missed: {missed:?}", caught.len(), CheckName::ALL.len())))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    // `cargo test` passes libtest flags; a listing request expects no output
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 10] = [
        ("exact partition suite", c1_exact_partitions),
        ("moment and block-count identity", c2_moments_and_pgf),
        ("Dirichlet mean of an indicator", c3_dirichlet_beta),
        ("Darling-Lamperti law", c4_lamperti),
        ("generic Cauchy-Stieltjes transform", c5_transform),
        ("composition rule", c6_composition),
        ("stable calculus", c7_stable_calculus),
        ("ratio density shape", c8_figure),
        ("convex order", c9_convex_order),
        ("corruption sentinels", c10_sentinels),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  {detail} [{:.1?}]",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
