//! Random discrete distributions: stick-breaking, finite Dirichlet draws,
//! normalized subordinator increments and the operations on them
//! (size-biased permutation, ranking, thinning, composition).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::sampling::{sample_ln_gamma, sample_stable, RngStream};

/// Tolerance on `sum(weights) + defect = 1`.
pub const MASS_TOL: f64 = 1e-12;

/// Hard limit on the number of atoms produced by stick-breaking.
pub const ATOM_GUARD: usize = 10_000_000;

/// Atoms kept by [`compose`]; smaller atoms are folded into the defect.
pub const COMPOSE_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    SizeBiased,
    Ranked,
    AsConstructed,
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Order::SizeBiased => "size_biased",
            Order::Ranked => "ranked",
            Order::AsConstructed => "as_constructed",
        })
    }
}

/// A finite list of non-negative weights plus the unaccounted mass (`defect`)
/// left over by truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample")]
pub struct RandomDiscreteSample {
    weights: Vec<f64>,
    defect: f64,
    order: Order,
}

#[derive(Deserialize)]
struct RawSample {
    weights: Vec<f64>,
    defect: f64,
    order: Order,
}

impl TryFrom<RawSample> for RandomDiscreteSample {
    type Error = Error;
    fn try_from(r: RawSample) -> Result<Self> {
        RandomDiscreteSample::new(r.weights, r.defect, r.order)
    }
}

impl RandomDiscreteSample {
    pub fn new(weights: Vec<f64>, defect: f64, order: Order) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameters("weights must be finite and non-negative".into()));
        }
        if !(defect >= 0.0) {
            return Err(Error::InvalidParameters(format!("defect {defect} must be non-negative")));
        }
        let s = Self { weights, defect, order };
        let total = s.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidParameters(format!("weights plus defect sum to {total}, not 1")));
        }
        if order == Order::Ranked && s.weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameters("ranked weights must be non-increasing".into()));
        }
        Ok(s)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::compensated_sum(&self.weights) + self.defect
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Which of the three admissible parameter ranges a pair `(alpha, theta)` is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `alpha < 0`, `theta = -m alpha`: symmetric Dirichlet with `m` atoms.
    Finite { m: usize },
    /// `alpha = 0`, `theta > 0`.
    Dirichlet,
    /// `0 < alpha < 1`, `theta > -alpha`.
    Stable,
}

/// Validated two-parameter family index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTheta {
    alpha: f64,
    theta: f64,
    regime: Regime,
}

impl AlphaTheta {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !alpha.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidParameters("alpha and theta must be finite".into()));
        }
        let regime = if alpha < 0.0 {
            let m = theta / -alpha;
            let mr = m.round();
            if !(theta > 0.0) || mr < 1.0 || (m - mr).abs() > 1e-9 * mr {
                return Err(Error::InvalidParameters(format!(
                    "alpha = {alpha} < 0 requires theta = m * |alpha| for a positive integer m, got theta = {theta}"
                )));
            }
            Regime::Finite { m: mr as usize }
        } else if alpha == 0.0 {
            if !(theta > 0.0) {
                return Err(Error::InvalidParameters(format!("alpha = 0 requires theta > 0, got {theta}")));
            }
            Regime::Dirichlet
        } else if alpha < 1.0 {
            if !(theta > -alpha) {
                return Err(Error::InvalidParameters(format!(
                    "0 < alpha < 1 requires theta > -alpha, got alpha = {alpha}, theta = {theta}"
                )));
            }
            Regime::Stable
        } else {
            return Err(Error::InvalidParameters(format!("alpha = {alpha} must be below 1")));
        };
        Ok(Self { alpha, theta, regime })
    }

    /// Symmetric Dirichlet with `m` atoms and total parameter `m * a`.
    pub fn finite(m: usize, a: f64) -> Result<Self> {
        if m == 0 || !(a > 0.0) {
            return Err(Error::InvalidParameters("need m >= 1 and a > 0".into()));
        }
        Ok(Self { alpha: -a, theta: m as f64 * a, regime: Regime::Finite { m } })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
}

impl std::fmt::Display for AlphaTheta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.alpha, self.theta)
    }
}

/// When to stop breaking sticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Stop once the unbroken residual is at most this.
    pub residual_tol: f64,
    /// Stop once `R * sqrt((1 - alpha) / (1 + theta + n alpha))`, the standard
    /// deviation (in units of `sd(X)`) of the contribution of the unbroken
    /// residual `R` to a mean, is below this.
    pub tail_sd_tol: Option<f64>,
    /// Stop after this many atoms and report the residual as defect.
    pub max_atoms: usize,
}

impl Truncation {
    pub fn residual(tol: f64) -> Self {
        Self { residual_tol: tol, tail_sd_tol: None, max_atoms: ATOM_GUARD }
    }

    /// Residual tolerance 1e-8 combined with a tail spread tolerance, for
    /// Monte Carlo use where only means are consumed.
    pub fn for_means(tail_sd_tol: f64) -> Self {
        Self { residual_tol: 1e-8, tail_sd_tol: Some(tail_sd_tol), max_atoms: 1_000_000 }
    }
}

/// `(B, 1 - B)` for `B ~ beta(a, b)`, each formed without subtraction.
pub(crate) fn beta_pair(a: f64, b: f64, rng: &mut RngStream) -> Result<(f64, f64)> {
    let lx = sample_ln_gamma(a, rng)?;
    let ly = sample_ln_gamma(b, rng)?;
    let d = ly - lx;
    // x = 1/(1+e^d), 1-x = 1/(1+e^-d)
    if d > 0.0 {
        let e = (-d).exp();
        Ok((e / (1.0 + e), 1.0 / (1.0 + e)))
    } else {
        let e = d.exp();
        Ok((1.0 / (1.0 + e), e / (1.0 + e)))
    }
}

/// GEM(alpha, theta) weights by stick-breaking, `H_i ~ beta(1 - alpha, theta + i alpha)`,
/// stopped once the residual mass is at most `trunc_tol`.
pub fn gem_stick_break(params: AlphaTheta, trunc_tol: f64, rng: &mut RngStream) -> Result<RandomDiscreteSample> {
    if !(trunc_tol > 0.0) {
        return Err(domain("gem_stick_break", "trunc_tol must be positive"));
    }
    stick_break(params, &Truncation::residual(trunc_tol), true, rng)
}

/// Stick-breaking under a [`Truncation`] policy; hitting `max_atoms` moves the
/// residual into the defect instead of failing.
pub fn gem_truncated(params: AlphaTheta, trunc: &Truncation, rng: &mut RngStream) -> Result<RandomDiscreteSample> {
    stick_break(params, trunc, false, rng)
}

fn stick_break(params: AlphaTheta, trunc: &Truncation, fail_on_cap: bool, rng: &mut RngStream) -> Result<RandomDiscreteSample> {
    let (alpha, theta) = (params.alpha, params.theta);
    let m = match params.regime {
        Regime::Finite { m } => Some(m),
        _ => None,
    };
    let mut weights = Vec::new();
    let mut resid = 1.0f64;
    let a = 1.0 - alpha;
    loop {
        let i = weights.len() + 1;
        if m == Some(i) {
            weights.push(resid);
            resid = 0.0;
            break;
        }
        let b = theta + i as f64 * alpha;
        let (h, one_minus_h) = beta_pair(a, b, rng)?;
        weights.push(resid * h);
        resid *= one_minus_h;
        if resid <= trunc.residual_tol {
            break;
        }
        if let Some(tol) = trunc.tail_sd_tol {
            let n = weights.len() as f64;
            if resid * ((1.0 - alpha) / (1.0 + theta + n * alpha)).sqrt() < tol {
                break;
            }
        }
        if weights.len() >= trunc.max_atoms.min(ATOM_GUARD) {
            if fail_on_cap || weights.len() >= ATOM_GUARD {
                return Err(Error::Guard { what: "stick-breaking atoms", value: weights.len(), limit: ATOM_GUARD });
            }
            break;
        }
    }
    RandomDiscreteSample::new(weights, resid, Order::SizeBiased)
}

/// Dirichlet(thetas) weights, in the order given.
pub fn dirichlet_finite(thetas: &[f64], rng: &mut RngStream) -> Result<RandomDiscreteSample> {
    if thetas.is_empty() || thetas.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(domain("dirichlet_finite", "need a non-empty list of positive parameters"));
    }
    let logs = thetas.iter().map(|&t| sample_ln_gamma(t, rng)).collect::<Result<Vec<_>>>()?;
    Ok(normalize_logs(&logs, Order::AsConstructed))
}

fn normalize_logs(logs: &[f64], order: Order) -> RandomDiscreteSample {
    let mx = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - mx).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    RandomDiscreteSample::new(w, 0.0, order).expect("normalized weights")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subordinator {
    Gamma,
    Stable { alpha: f64 },
}

/// Increments of a subordinator over consecutive intervals of the given
/// lengths, normalized by their total.
pub fn subordinator_increments(kind: Subordinator, lengths: &[f64], rng: &mut RngStream) -> Result<RandomDiscreteSample> {
    if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(domain("subordinator_increments", "need a non-empty list of positive lengths"));
    }
    let logs = match kind {
        Subordinator::Gamma => lengths.iter().map(|&l| sample_ln_gamma(l, rng)).collect::<Result<Vec<_>>>()?,
        Subordinator::Stable { alpha } => lengths
            .iter()
            .map(|&l| Ok(l.ln() / alpha + sample_stable(alpha, rng)?.ln()))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(normalize_logs(&logs, Order::AsConstructed))
}

/// Weights rearranged in size-biased random order. Requires `defect = 0`.
pub fn size_biased_permutation(sample: &RandomDiscreteSample, rng: &mut RngStream) -> Result<RandomDiscreteSample> {
    if sample.defect != 0.0 {
        return Err(Error::Precondition("size-biased permutation needs defect = 0".into()));
    }
    // exponential clocks with rates w_i ring in size-biased order
    let mut keyed: Vec<(f64, f64)> = sample
        .weights
        .iter()
        .map(|&w| (if w > 0.0 { rng.exponential() / w } else { f64::INFINITY }, w))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    RandomDiscreteSample::new(keyed.into_iter().map(|k| k.1).collect(), 0.0, Order::SizeBiased)
}

/// Weights in non-increasing order; the defect is kept as is.
pub fn rank_decreasing(sample: &RandomDiscreteSample) -> RandomDiscreteSample {
    let mut w = sample.weights.clone();
    w.sort_by(|a, b| b.total_cmp(a));
    RandomDiscreteSample { weights: w, defect: sample.defect, order: Order::Ranked }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Thinning {
    Kept { kept_mass: f64, thinned: RandomDiscreteSample },
    /// No atom survived.
    Empty,
}

/// Keeps each atom independently with probability `p` and renormalizes.
/// Requires `defect = 0`.
pub fn p_thin(sample: &RandomDiscreteSample, p: f64, rng: &mut RngStream) -> Result<Thinning> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p_thin", format!("p = {p} must lie in [0,1]")));
    }
    if sample.defect != 0.0 {
        return Err(Error::Precondition("p-thinning needs defect = 0".into()));
    }
    let kept: Vec<f64> = sample.weights.iter().copied().filter(|_| rng.uniform() < p).collect();
    let mass: f64 = kept.iter().sum();
    if kept.is_empty() || mass <= 0.0 {
        return Ok(Thinning::Empty);
    }
    let w: Vec<f64> = kept.iter().map(|x| x / mass).collect();
    let s: f64 = w.iter().sum();
    Ok(Thinning::Kept {
        kept_mass: mass,
        thinned: RandomDiscreteSample::new(w, (1.0 - s).max(0.0), sample.order)?,
    })
}

/// The composition `P (x) Q`: atom `i` of `P` is split according to an
/// independent draw `Q_i = q_factory(P_i, rng)`; the parent weight is passed so
/// the factory may truncate small parents more coarsely. Defects of `P` and of
/// every `Q_i` add up in the output defect. The result is ranked and keeps at
/// most [`COMPOSE_CAP`] atoms.
pub fn compose<F>(p: &RandomDiscreteSample, mut q_factory: F, rng: &mut RngStream) -> Result<RandomDiscreteSample>
where
    F: FnMut(f64, &mut RngStream) -> Result<RandomDiscreteSample>,
{
    let mut out = Vec::new();
    let mut defect = p.defect;
    for &pi in &p.weights {
        let q = q_factory(pi, rng)?;
        out.extend(q.weights.iter().map(|&w| pi * w));
        defect += pi * q.defect;
    }
    out.sort_by(|a, b| b.total_cmp(a));
    if out.len() > COMPOSE_CAP {
        let trimmed: f64 = out[COMPOSE_CAP..].iter().sum();
        defect += trimmed;
        out.truncate(COMPOSE_CAP);
    }
    let s: f64 = crate::numeric::compensated_sum(&out);
    let defect = if defect > 0.0 { (1.0 - s).max(0.0) } else { 0.0 };
    RandomDiscreteSample::new(out, defect, Order::Ranked)
}

/// Poisson-Dirichlet(alpha, theta): ranked GEM weights.
pub fn poisson_dirichlet(params: AlphaTheta, trunc: &Truncation, rng: &mut RngStream) -> Result<RandomDiscreteSample> {
    Ok(rank_decreasing(&gem_truncated(params, trunc, rng)?))
}
