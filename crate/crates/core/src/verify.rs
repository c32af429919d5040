//! Monte Carlo checks of distributional identities for random means, each
//! reduced to a statistic and a pass threshold.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::discrete::{
    beta_pair, compose, dirichlet_finite, gem_truncated, subordinator_increments, AlphaTheta, Subordinator, Truncation,
};
use crate::error::{Error, Result};
use crate::numeric::mean_and_se;
use crate::pmean::{cs_transform_rhs, darling_lamperti_cdf, pmean_of, AtomicDistribution};
use crate::sampling::{chunked, sample_beta, sample_gamma, sample_stable, RngStream};
use crate::specialfn::{log_gamma, mittag_leffler, SeriesControl};

/// KS acceptance constant: reject when `D > KS_COEF / sqrt(n)`.
pub const KS_COEF: f64 = 1.95;

/// Moment checks accept within this many standard errors.
pub const SE_MULT: f64 = 3.0;

/// Floor on moment thresholds, covering pure rounding when the standard error vanishes.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Size of the target-parameter perturbation used by sentinel runs.
pub const SENTINEL_SHIFT: f64 = 0.2;

/// Spread tolerance for truncated stick-breaking inside the checks.
pub const MC_TAIL_SD: f64 = 5e-3;

const CHUNK: usize = 8192;

/// One-sample Kolmogorov-Smirnov distance between the empirical law of
/// `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    ks_sorted(&xs, cdf)
}

/// [`ks_statistic`] for already sorted samples.
pub fn ks_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn ks_threshold(n: usize) -> f64 {
    KS_COEF / (n as f64).sqrt()
}

pub fn ks_two_sample_threshold(n: usize, m: usize) -> f64 {
    KS_COEF * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    DirichletBeta,
    SymmetricDirichletBeta,
    LampertiDensity,
    CompositionRule,
    MlSurvival,
    Shanbag,
    MellinStable,
    CsTransform,
    StochasticFixedPoint,
    ResidualSplitTransform,
    HannumSign,
    CauchyInvariance,
    ThinningInvariance,
}

impl CheckName {
    pub const ALL: [CheckName; 13] = [
        CheckName::DirichletBeta,
        CheckName::SymmetricDirichletBeta,
        CheckName::LampertiDensity,
        CheckName::CompositionRule,
        CheckName::MlSurvival,
        CheckName::Shanbag,
        CheckName::MellinStable,
        CheckName::CsTransform,
        CheckName::StochasticFixedPoint,
        CheckName::ResidualSplitTransform,
        CheckName::HannumSign,
        CheckName::CauchyInvariance,
        CheckName::ThinningInvariance,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::DirichletBeta => "dirichlet_beta",
            CheckName::SymmetricDirichletBeta => "symmetric_dirichlet_beta",
            CheckName::LampertiDensity => "lamperti_density",
            CheckName::CompositionRule => "composition_rule",
            CheckName::MlSurvival => "ml_survival",
            CheckName::Shanbag => "shanbag",
            CheckName::MellinStable => "mellin_stable",
            CheckName::CsTransform => "cs_transform",
            CheckName::StochasticFixedPoint => "stochastic_fixed_point",
            CheckName::ResidualSplitTransform => "residual_split_transform",
            CheckName::HannumSign => "hannum_sign",
            CheckName::CauchyInvariance => "cauchy_invariance",
            CheckName::ThinningInvariance => "thinning_invariance",
        }
    }

    /// The parameter moved by a sentinel run.
    pub fn target_parameter(&self) -> &'static str {
        match self {
            CheckName::DirichletBeta
            | CheckName::LampertiDensity
            | CheckName::CsTransform
            | CheckName::StochasticFixedPoint
            | CheckName::ResidualSplitTransform
            | CheckName::HannumSign
            | CheckName::ThinningInvariance => "p",
            CheckName::SymmetricDirichletBeta => "a",
            CheckName::CompositionRule | CheckName::MlSurvival => "alpha",
            CheckName::Shanbag => "rate",
            CheckName::MellinStable => "r",
            CheckName::CauchyInvariance => "location",
        }
    }

    fn stream(&self) -> u64 {
        // FNV-1a of the name, so each check draws from its own stream
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.as_str().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }
}

/// Parameters of one check run. Fields a check does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub alpha: f64,
    pub theta: f64,
    pub p: f64,
    pub lambda: f64,
    pub m: usize,
    pub x: f64,
    pub r: f64,
    /// Added to the target parameter; non-zero only for sentinel runs.
    pub target_shift: f64,
}

impl CheckConfig {
    pub fn default_for(name: CheckName) -> Self {
        let n_samples = match name {
            CheckName::MlSurvival | CheckName::MellinStable => 1_000_000,
            CheckName::CompositionRule | CheckName::ThinningInvariance => 100_000,
            _ => 200_000,
        };
        let lambda = if name == CheckName::ResidualSplitTransform { 0.5 } else { 1.0 };
        Self { seed: 1, n_samples, alpha: 0.5, theta: 1.0, p: 0.3, lambda, m: 3, x: 1.0, r: 0.25, target_shift: 0.0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn sentinel(mut self) -> Self {
        self.target_shift = SENTINEL_SHIFT;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema: u32,
    pub check_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub passed: bool,
    pub sentinel: bool,
    pub params: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn shift_prob(p: f64, s: f64) -> f64 {
    if s == 0.0 {
        p
    } else if p + s < 1.0 {
        p + s
    } else {
        p - s
    }
}

fn shift_alpha(a: f64, s: f64) -> f64 {
    if s == 0.0 {
        a
    } else if a + s < 1.0 {
        a + s
    } else {
        a - s
    }
}

fn bern(p: f64) -> impl Fn(&mut RngStream) -> f64 + Copy {
    move |r: &mut RngStream| if r.uniform() < p { 1.0 } else { 0.0 }
}

fn means_trunc() -> Truncation {
    Truncation::for_means(MC_TAIL_SD)
}

/// Residual tolerance for GEM(0, theta) means of a variable whose law gives
/// the mean a boundary behaviour like `u^shape`: substituting the mean for the
/// tail moves mass by about `tol^shape`, so the tolerance shrinks with the
/// smallest shape. Residuals decay geometrically here, so this stays cheap.
fn dirichlet_trunc(min_shape: f64) -> Truncation {
    let tol = 1e-8f64.min(1e-4f64.powf(1.0 / min_shape)).max(1e-250);
    Truncation::residual(tol)
}

fn simulate<F>(rng: &RngStream, n: usize, f: F) -> Result<Vec<f64>>
where
    F: FnMut(&mut RngStream) -> Result<f64>,
{
    chunked(rng, n, CHUNK, f)
}

fn beta_cdf(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            beta_reg(a, b, x)
        }
    }
}

struct Outcome {
    statistic: f64,
    threshold: f64,
    params: Vec<(&'static str, f64)>,
}

fn moment_outcome(ys: &[f64], target: f64) -> (f64, f64) {
    let (m, se) = mean_and_se(ys);
    ((m - target).abs(), (SE_MULT * se).max(ROUNDING_FLOOR))
}

/// Runs one check.
pub fn run_check(name: CheckName, cfg: &CheckConfig) -> Result<CheckReport> {
    if cfg.n_samples < 2 {
        return Err(Error::InvalidParameters("need at least two samples".into()));
    }
    let rng = RngStream::new(cfg.seed, name.stream());
    let s = cfg.target_shift;
    let n = cfg.n_samples;
    let out = match name {
        CheckName::DirichletBeta => {
            // simulate the mean of the rarer indicator: a mean close to 1
            // would lose its distance from 1 to rounding
            let params = AlphaTheta::new(0.0, cfg.theta)?;
            let flip = cfg.p > 0.5;
            let pp = if flip { 1.0 - cfg.p } else { cfg.p };
            let x = bern(pp);
            let trunc = dirichlet_trunc(cfg.theta * pp);
            let ys = simulate(&rng, n, |r| {
                let pd = gem_truncated(params, &trunc, r)?;
                Ok(pmean_of(&pd, x, pp, r))
            })?;
            let pt = shift_prob(cfg.p, s);
            let (a, b) = if flip { (1.0 - pt, pt) } else { (pt, 1.0 - pt) };
            Outcome {
                statistic: ks_statistic(&ys, beta_cdf(a * cfg.theta, b * cfg.theta)),
                threshold: ks_threshold(n),
                params: vec![("theta", cfg.theta), ("p", cfg.p)],
            }
        }
        CheckName::SymmetricDirichletBeta => {
            let (a, b) = (cfg.p * cfg.theta, (1.0 - cfg.p) * cfg.theta);
            let weights = vec![a + b; cfg.m];
            let ys = simulate(&rng, n, |r| {
                let pd = dirichlet_finite(&weights, r)?;
                let mut acc = 0.0;
                for w in pd.weights() {
                    acc += w * sample_beta(a, b, r)?;
                }
                Ok(acc)
            })?;
            let m = cfg.m as f64;
            Outcome {
                statistic: ks_statistic(&ys, beta_cdf(m * (a + s), m * b)),
                threshold: ks_threshold(n),
                params: vec![("m", m), ("a", a), ("b", b)],
            }
        }
        CheckName::LampertiDensity => {
            // the (alpha, 0) mean of an indicator is the share of a stable
            // subordinator's increments falling on the unit's p-part
            let kind = Subordinator::Stable { alpha: cfg.alpha };
            let lengths = [cfg.p, 1.0 - cfg.p];
            let ys = simulate(&rng, n, |r| Ok(subordinator_increments(kind, &lengths, r)?.weights()[0]))?;
            let pt = shift_prob(cfg.p, s);
            let alpha = cfg.alpha;
            Outcome {
                statistic: ks_statistic(&ys, |u| darling_lamperti_cdf(alpha, pt, u).unwrap_or(f64::NAN)),
                threshold: ks_threshold(n),
                params: vec![("alpha", cfg.alpha), ("p", cfg.p)],
            }
        }
        CheckName::CompositionRule => {
            let outer = AlphaTheta::new(0.0, cfg.theta)?;
            let inner = AlphaTheta::new(cfg.alpha, 0.0)?;
            let x = bern(cfg.p);
            let composed = simulate(&rng.split(0), n, |r| {
                let pd = gem_truncated(outer, &means_trunc(), r)?;
                let spread = MC_TAIL_SD / (pd.len() as f64).sqrt();
                let c = compose(&pd, |pi, rr| gem_truncated(inner, &Truncation::for_means(spread / pi), rr), r)?;
                Ok(pmean_of(&c, x, cfg.p, r))
            })?;
            let target = AlphaTheta::new(shift_alpha(cfg.alpha, s), cfg.theta)?;
            let direct = simulate(&rng.split(1), n, |r| {
                let pd = gem_truncated(target, &means_trunc(), r)?;
                Ok(pmean_of(&pd, x, cfg.p, r))
            })?;
            Outcome {
                statistic: ks_two_sample(&composed, &direct),
                threshold: ks_two_sample_threshold(n, n),
                params: vec![("alpha", cfg.alpha), ("theta", cfg.theta), ("p", cfg.p)],
            }
        }
        CheckName::MlSurvival => {
            let (alpha, xv) = (cfg.alpha, cfg.x);
            let ys = simulate(&rng, n, |r| {
                let ratio = sample_stable(alpha, r)? / sample_stable(alpha, r)?;
                Ok(if r.exponential() * ratio > xv { 1.0 } else { 0.0 })
            })?;
            let at = shift_alpha(alpha, s);
            let target = mittag_leffler(at, -xv.powf(at), SeriesControl::default())?;
            let (stat, thr) = moment_outcome(&ys, target);
            Outcome { statistic: stat, threshold: thr, params: vec![("alpha", alpha), ("x", xv)] }
        }
        CheckName::Shanbag => {
            let alpha = cfg.alpha;
            let ys = simulate(&rng, n, |r| Ok((r.exponential() / sample_stable(alpha, r)?).powf(alpha)))?;
            let rate = 1.0 + s;
            Outcome {
                statistic: ks_statistic(&ys, |y| if y <= 0.0 { 0.0 } else { -(-rate * y).exp_m1() }),
                threshold: ks_threshold(n),
                params: vec![("alpha", alpha)],
            }
        }
        CheckName::MellinStable => {
            let (alpha, rr) = (cfg.alpha, cfg.r);
            if !(rr < 1.0) {
                return Err(Error::InvalidParameters("mellin_stable needs r < 1".into()));
            }
            let ys = simulate(&rng, n, |r| Ok((alpha * rr * sample_stable(alpha, r)?.ln()).exp()))?;
            let rt = rr + s;
            let target = (log_gamma(1.0 - rt)? - log_gamma(1.0 - alpha * rt)?).exp();
            let (stat, thr) = moment_outcome(&ys, target);
            Outcome { statistic: stat, threshold: thr, params: vec![("alpha", alpha), ("r", rr)] }
        }
        CheckName::CsTransform => {
            let params = AlphaTheta::new(cfg.alpha, cfg.theta)?;
            let (lambda, theta) = (cfg.lambda, cfg.theta);
            let x = bern(cfg.p);
            let ys = simulate(&rng, n, |r| {
                let pd = gem_truncated(params, &means_trunc(), r)?;
                Ok((1.0 + lambda * pmean_of(&pd, x, cfg.p, r)).powf(-theta))
            })?;
            let target = cs_transform_rhs(params, &AtomicDistribution::bernoulli(shift_prob(cfg.p, s))?, lambda)?;
            let (stat, thr) = moment_outcome(&ys, target);
            Outcome {
                statistic: stat,
                threshold: thr,
                params: vec![("alpha", cfg.alpha), ("theta", theta), ("lambda", lambda), ("p", cfg.p)],
            }
        }
        CheckName::StochasticFixedPoint => {
            let params = AlphaTheta::new(0.0, cfg.theta)?;
            let x = bern(cfg.p);
            let pt = shift_prob(cfg.p, s);
            let trunc = dirichlet_trunc(cfg.theta * cfg.p.min(1.0 - cfg.p));
            let draw = |r: &mut RngStream| -> Result<f64> {
                let pd = gem_truncated(params, &trunc, r)?;
                Ok(pmean_of(&pd, x, cfg.p, r))
            };
            let a = simulate(&rng.split(0), n, draw)?;
            let b = simulate(&rng.split(1), n, |r| {
                let p1 = sample_beta(1.0, cfg.theta, r)?;
                let x1 = bern(pt)(r);
                Ok(p1 * x1 + (1.0 - p1) * draw(r)?)
            })?;
            Outcome {
                statistic: ks_two_sample(&a, &b),
                threshold: ks_two_sample_threshold(n, n),
                params: vec![("theta", cfg.theta), ("p", cfg.p)],
            }
        }
        CheckName::ResidualSplitTransform => {
            let (theta, lambda) = (cfg.theta, cfg.lambda);
            if !(lambda < 1.0 && lambda > -1.0) {
                return Err(Error::InvalidParameters("residual_split_transform needs |lambda| < 1".into()));
            }
            let params = AlphaTheta::new(0.0, theta)?;
            let x = bern(cfg.p);
            let pt = shift_prob(cfg.p, s);
            // E(1 - lambda X)^-1 for the Bernoulli factor
            let c = 1.0 - pt + pt / (1.0 - lambda);
            let ys = simulate(&rng, n, |r| {
                let pd = gem_truncated(params, &means_trunc(), r)?;
                let base = 1.0 - lambda * pmean_of(&pd, x, cfg.p, r);
                Ok(base.powf(-(1.0 + theta)) - c * base.powf(-theta))
            })?;
            let (stat, thr) = moment_outcome(&ys, 0.0);
            Outcome { statistic: stat, threshold: thr, params: vec![("theta", theta), ("p", cfg.p), ("lambda", lambda)] }
        }
        CheckName::HannumSign => {
            let params = AlphaTheta::new(0.0, cfg.theta)?;
            let values = [0.0, 0.5, 1.0];
            let probs = |p: f64| [1.0 - p, 0.5 * p, 0.5 * p];
            let xd = AtomicDistribution::new(values.to_vec(), probs(cfg.p).to_vec())?;
            let ex = xd.mean();
            let grid: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
            let trunc = dirichlet_trunc(cfg.theta * 0.5 * cfg.p.min(1.0 - cfg.p));
            let a = simulate(&rng.split(0), n, |r| {
                let pd = gem_truncated(params, &trunc, r)?;
                Ok(pmean_of(&pd, |rr| xd.sample(rr), ex, r))
            })?;
            let shapes: Vec<f64> = probs(shift_prob(cfg.p, s)).iter().map(|q| q * cfg.theta).collect();
            let mut neg = vec![0usize; grid.len()];
            let mut child = 0u64;
            let mut done = 0usize;
            while done < n {
                let mut r = rng.split(1).split(child);
                let take = CHUNK.min(n - done);
                for _ in 0..take {
                    let g = shapes.iter().map(|&sh| sample_gamma(sh, &mut r)).collect::<Result<Vec<_>>>()?;
                    for (k, &xg) in grid.iter().enumerate() {
                        let t: f64 = values.iter().zip(&g).map(|(v, gi)| (v - xg) * gi).sum();
                        if t <= 0.0 {
                            neg[k] += 1;
                        }
                    }
                }
                done += take;
                child += 1;
            }
            let mut sorted = a.clone();
            sorted.sort_by(|x, y| x.total_cmp(y));
            let mut stat: f64 = 0.0;
            for (k, &xg) in grid.iter().enumerate() {
                let fa = sorted.partition_point(|&v| v <= xg) as f64 / n as f64;
                stat = stat.max((fa - neg[k] as f64 / n as f64).abs());
            }
            Outcome { statistic: stat, threshold: ks_two_sample_threshold(n, n), params: vec![("theta", cfg.theta), ("p", cfg.p)] }
        }
        CheckName::CauchyInvariance => {
            let params = AlphaTheta::new(cfg.alpha, cfg.theta)?;
            let (loc, scale) = (1.0, 1.0);
            // any truncation is exact here: the tail of a Cauchy P-mean is defect times a Cauchy
            let cauchy_trunc = Truncation { residual_tol: 1e-2, tail_sd_tol: None, max_atoms: 64 };
            let cauchy = move |r: &mut RngStream| loc + scale * (PI * (r.uniform() - 0.5)).tan();
            let mut ys = simulate(&rng, n, |r| {
                let pd = gem_truncated(params, &cauchy_trunc, r)?;
                // a Cauchy tail mixes to the same Cauchy law, so the residual is completed exactly
                let head = pmean_of(&pd, cauchy, 0.0, r);
                Ok(head + pd.defect() * cauchy(r))
            })?;
            ys.sort_by(|x, y| x.total_cmp(y));
            let lt = loc + s;
            let mut stat: f64 = 0.0;
            for &u in &[0.25, 0.5, 0.75] {
                let z = (PI * (u - 0.5)).tan();
                let q = lt + scale * z;
                let dens = 1.0 / (PI * scale * (1.0 + z * z));
                let se = (u * (1.0 - u) / n as f64).sqrt() / dens;
                let idx = ((u * n as f64).ceil() as usize).clamp(1, n) - 1;
                stat = stat.max((ys[idx] - q).abs() / se);
            }
            Outcome { statistic: stat, threshold: SE_MULT, params: vec![("alpha", cfg.alpha), ("theta", cfg.theta)] }
        }
        CheckName::ThinningInvariance => {
            let keep = 0.5;
            let x = bern(cfg.p);
            let thinned = simulate(&rng.split(0), n, |r| thinned_stable_mean(cfg.alpha, keep, cfg.p, &x, r))?;
            let pt = shift_prob(cfg.p, s);
            let kind = Subordinator::Stable { alpha: cfg.alpha };
            let lengths = [pt, 1.0 - pt];
            let direct =
                simulate(&rng.split(1), n, |r| Ok(subordinator_increments(kind, &lengths, r)?.weights()[0]))?;
            Outcome {
                statistic: ks_two_sample(&thinned, &direct),
                threshold: ks_two_sample_threshold(n, n),
                params: vec![("alpha", cfg.alpha), ("p", cfg.p), ("keep", keep)],
            }
        }
    };
    let mut params: BTreeMap<String, f64> = out.params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    if s != 0.0 {
        params.insert(format!("shift_{}", name.target_parameter()), s);
    }
    Ok(CheckReport {
        schema: 1,
        check_name: name.as_str().to_string(),
        statistic: out.statistic,
        threshold: out.threshold,
        n_samples: n,
        seed: cfg.seed,
        passed: out.statistic <= out.threshold,
        sentinel: s != 0.0,
        params,
    })
}

const THETAS: [f64; 3] = [0.5, 1.0, 2.0];
const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];
const PS: [f64; 3] = [0.2, 0.5, 0.8];

/// Mean of `x` under GEM(alpha, 0) weights after keeping each atom with
/// probability `keep` and renormalising. Sticks are broken until the spread of
/// the unbroken remainder's contribution is small next to the kept mass, since
/// thinning can discard every atom drawn so far.
fn thinned_stable_mean<X: Fn(&mut RngStream) -> f64>(
    alpha: f64,
    keep: f64,
    ex: f64,
    x: &X,
    r: &mut RngStream,
) -> Result<f64> {
    const MAX_ATOMS: usize = 1_000_000;
    const EDGE_FRACTION: f64 = 0.1;
    const EDGE_ATOMS: usize = 2000;
    let (mut num, mut den) = (0.0, 0.0);
    let mut ln_rest = 0.0f64;
    for k in 0..MAX_ATOMS {
        let (v, v_rest) = beta_pair(1.0 - alpha, alpha * (k as f64 + 1.0), r)?;
        let w = (ln_rest + v.ln()).exp();
        ln_rest += v_rest.ln();
        if r.uniform() < keep {
            num += w * x(r);
            den += w;
        }
        if den > 0.0 {
            // the remainder is a PD(alpha, (k + 1) alpha) mixture whose mean
            // of x has spread of order sqrt((1 - alpha) / (1 + (k + 1) alpha))
            let rel = ln_rest.exp() / den;
            let spread = rel * ((1.0 - alpha) / (1.0 + alpha * (k as f64 + 1.0))).sqrt();
            // near 0 or 1 the substituted mean drags the value inwards, so
            // the remainder must also be small next to the distance to the
            // nearer endpoint (relaxed once many atoms have been drawn)
            let m = num / den;
            let edge = m.min(1.0 - m);
            if spread < MC_TAIL_SD && (rel < EDGE_FRACTION * edge || k >= EDGE_ATOMS) {
                break;
            }
        }
    }
    let tail = keep * ln_rest.exp();
    Ok((num + tail * ex) / (den + tail))
}

/// The default parameter grid of a check.
pub fn default_grid(name: CheckName) -> Vec<CheckConfig> {
    let base = CheckConfig::default_for(name);
    let mut out = Vec::new();
    match name {
        CheckName::DirichletBeta
        | CheckName::SymmetricDirichletBeta
        | CheckName::StochasticFixedPoint
        | CheckName::ResidualSplitTransform
        | CheckName::HannumSign => {
            for &theta in &THETAS {
                for &p in &PS {
                    out.push(CheckConfig { theta, p, ..base.clone() });
                }
            }
        }
        CheckName::LampertiDensity | CheckName::ThinningInvariance => {
            for &alpha in &ALPHAS {
                for &p in &PS {
                    out.push(CheckConfig { alpha, p, ..base.clone() });
                }
            }
        }
        CheckName::CompositionRule => {
            for &alpha in &ALPHAS {
                out.push(CheckConfig { alpha, theta: 1.0, ..base.clone() });
            }
            for &theta in &[0.5, 2.0] {
                out.push(CheckConfig { alpha: 0.5, theta, ..base.clone() });
            }
        }
        CheckName::MlSurvival => {
            for &alpha in &ALPHAS {
                for &x in &[0.5, 1.0, 2.0] {
                    out.push(CheckConfig { alpha, x, ..base.clone() });
                }
            }
        }
        CheckName::Shanbag => {
            for &alpha in &ALPHAS {
                out.push(CheckConfig { alpha, ..base.clone() });
            }
        }
        CheckName::MellinStable => {
            for &alpha in &ALPHAS {
                for &r in &[-0.4, 0.25] {
                    out.push(CheckConfig { alpha, r, ..base.clone() });
                }
            }
        }
        CheckName::CsTransform => {
            for &alpha in &ALPHAS {
                for &theta in &THETAS {
                    out.push(CheckConfig { alpha, theta, p: 0.4, ..base.clone() });
                }
            }
        }
        CheckName::CauchyInvariance => {
            for &theta in &THETAS {
                out.push(CheckConfig { alpha: 0.0, theta, ..base.clone() });
            }
            for &alpha in &ALPHAS {
                out.push(CheckConfig { alpha, theta: 1.0, ..base.clone() });
            }
        }
    }
    out
}

/// Runs `checks` over their default grids. Cells run in parallel; reports
/// come back in grid order regardless of scheduling.
pub fn run_grid(checks: &[CheckName], seed: u64, samples: Option<usize>) -> Result<Vec<CheckReport>> {
    let cells: Vec<(CheckName, CheckConfig)> = checks
        .iter()
        .flat_map(|&c| {
            default_grid(c).into_iter().map(move |cfg| {
                let cfg = cfg.with_seed(seed);
                let cfg = match samples {
                    Some(n) => cfg.with_samples(n),
                    None => cfg,
                };
                (c, cfg)
            })
        })
        .collect();
    run_cells(&cells)
}

/// Runs each `(check, config)` pair, in parallel, returning reports in input order.
pub fn run_cells(cells: &[(CheckName, CheckConfig)]) -> Result<Vec<CheckReport>> {
    cells.par_iter().map(|(c, cfg)| run_check(*c, cfg)).collect()
}
