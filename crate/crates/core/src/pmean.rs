//! Random means `X~ = sum_j X_j P_j`: exact moments from partition
//! probabilities, Monte Carlo evaluation and closed-form transforms.

use std::f64::consts::PI;

use crate::discrete::{AlphaTheta, RandomDiscreteSample};
use crate::error::{domain, Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::partition::{arrangements, integer_partitions, kn_distribution, PartitionStructure, UniformSampling};
use crate::sampling::RngStream;

/// Probability tolerance for [`AtomicDistribution`].
pub const PROB_TOL: f64 = 1e-12;

/// Largest order for [`product_moment`] (Bell(12) set partitions).
pub const PRODUCT_MOMENT_MAX_N: usize = 12;

/// A distribution on finitely many distinct real values.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl AtomicDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidParameters("values and probs must be non-empty and of equal length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameters("values must be finite and probs non-negative".into()));
        }
        let total = compensated_sum(&probs);
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidParameters(format!("probs sum to {total}, not 1")));
        }
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameters("values must be distinct".into()));
        }
        let mut cum = Vec::with_capacity(probs.len());
        let mut c = 0.0;
        for p in &probs {
            c += p;
            cum.push(c);
        }
        Ok(Self { values, probs, cum })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain("bernoulli", format!("p = {p} must lie in [0,1]")));
        }
        Self::new(vec![0.0, 1.0], vec![1.0 - p, p])
    }

    pub fn degenerate(c: f64) -> Result<Self> {
        Self::new(vec![c], vec![1.0])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `E X^j`.
    pub fn moment(&self, j: u32) -> f64 {
        self.values.iter().zip(&self.probs).map(|(x, p)| p * x.powi(j as i32)).collect::<CompensatedSum>().value()
    }

    pub fn moments(&self, n: usize) -> MomentVector {
        MomentVector::new((1..=n as u32).map(|j| self.moment(j)).collect())
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().zip(&self.probs).map(|(x, p)| p * (x - m) * (x - m)).sum()
    }

    /// `E g(X)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.values.iter().zip(&self.probs).map(|(&x, p)| p * g(x)).collect::<CompensatedSum>().value()
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.uniform() * self.cum[self.cum.len() - 1];
        let i = self.cum.partition_point(|&c| c <= u).min(self.values.len() - 1);
        self.values[i]
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.iter().zip(&self.probs).filter(|(v, _)| **v <= x).map(|(_, p)| p).sum()
    }
}

/// Raw moments `E Y^1, ..., E Y^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    raw: Vec<f64>,
}

impl MomentVector {
    pub fn new(raw: Vec<f64>) -> Self {
        Self { raw }
    }

    /// `E Y^j`, with `E Y^0 = 1`.
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            self.raw[j - 1]
        }
    }

    pub fn order(&self) -> usize {
        self.raw.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.raw
    }
}

fn check_order(mx: &MomentVector, n: usize) -> Result<()> {
    if mx.order() < n {
        return Err(Error::InvalidParameters(format!("need {n} moments of X, got {}", mx.order())));
    }
    Ok(())
}

/// `E X~^j` for `j = 1..=n`: the sum over compositions of `j` of the ECPF
/// times the product of the matching moments of `X`.
pub fn exact_pmean_moments<P: PartitionStructure + ?Sized>(model: &P, mx: &MomentVector, n: usize) -> Result<MomentVector> {
    check_order(mx, n)?;
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        let mut acc = CompensatedSum::new();
        for parts in integer_partitions(j) {
            let prod: f64 = parts.iter().map(|&p| mx.get(p)).product();
            acc.add(arrangements(&parts) * model.ecpf_parts(&parts) * prod);
        }
        out.push(acc.value());
    }
    Ok(MomentVector::new(out))
}

/// Moments of the average of `m` independent copies of `X`.
pub fn classical_mean_moments(m: usize, mx: &MomentVector, n: usize) -> Result<MomentVector> {
    if m == 0 {
        return Err(domain("classical_mean_moments", "m must be positive"));
    }
    exact_pmean_moments(&UniformSampling { m }, mx, n)
}

/// `E prod_{i=1}^n Y_i(X~)` for random means of several functions of the same
/// draw: sum over set partitions `{B_1..B_k}` of `[n]` of
/// `p(|B_1|, ..., |B_k|) prod_j mu(B_j)`, where `mu(B)` is `E prod_{i in B} Y_i(X)`.
pub fn product_moment<P, F>(model: &P, n: usize, mut mu: F) -> Result<f64>
where
    P: PartitionStructure + ?Sized,
    F: FnMut(&[usize]) -> f64,
{
    if n == 0 {
        return Ok(1.0);
    }
    if n > PRODUCT_MOMENT_MAX_N {
        return Err(Error::Guard { what: "product moment order", value: n, limit: PRODUCT_MOMENT_MAX_N });
    }
    // restricted growth strings enumerate set partitions
    let mut rgs = vec![0usize; n];
    let mut acc = CompensatedSum::new();
    loop {
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        let sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
        let mut term = model.eppf_parts(&sizes);
        if term != 0.0 {
            for b in &blocks {
                term *= mu(b);
            }
        }
        acc.add(term);
        // advance
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(acc.value());
            }
            let max_prev = rgs[..i].iter().max().copied().unwrap_or(0);
            if rgs[i] <= max_prev {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// `E v^{K_n}`.
pub fn pgf_kn_moment<P: PartitionStructure + ?Sized>(model: &P, v: f64, n: usize) -> Result<f64> {
    let dist = kn_distribution(model, n)?;
    let mut acc = CompensatedSum::new();
    for (k, p) in dist.iter().enumerate() {
        acc.add(p * v.powi(k as i32));
    }
    Ok(acc.value())
}

/// `sum_j X_j P_j + defect * ex` for one draw of `P`.
pub fn pmean_of<S>(p: &RandomDiscreteSample, mut x: S, ex: f64, rng: &mut RngStream) -> f64
where
    S: FnMut(&mut RngStream) -> f64,
{
    let mut acc = 0.0;
    for &w in p.weights() {
        acc += w * x(rng);
    }
    acc + p.defect() * ex
}

/// One Monte Carlo draw of the random mean. The truncated mass is credited
/// with the caller-supplied `ex = E X`.
pub fn mc_pmean<F, S>(mut p_factory: F, x: S, ex: f64, rng: &mut RngStream) -> Result<f64>
where
    F: FnMut(&mut RngStream) -> Result<RandomDiscreteSample>,
    S: FnMut(&mut RngStream) -> f64,
{
    let p = p_factory(rng)?;
    Ok(pmean_of(&p, x, ex, rng))
}

fn check_unit(func: &'static str, alpha: f64, p: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(func, format!("alpha = {alpha} must lie in (0,1)")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(func, format!("p = {p} must lie in (0,1)")));
    }
    Ok(())
}

fn dl_pdf_split(alpha: f64, p: f64, u: f64, w: f64) -> f64 {
    let q = 1.0 - p;
    let (s, c) = (PI * alpha).sin_cos();
    let ua = u.powf(alpha);
    let wa = w.powf(alpha);
    let num = p * q * s * ua / u * wa / w;
    let den = PI * (q * q * ua * ua + 2.0 * p * q * ua * wa * c + p * p * wa * wa);
    num / den
}

/// Density on (0,1) of the (alpha, 0) mean of a Bernoulli(p) indicator.
pub fn darling_lamperti_pdf(alpha: f64, p: f64, u: f64) -> Result<f64> {
    check_unit("darling_lamperti_pdf", alpha, p)?;
    if !(u > 0.0 && u < 1.0) {
        return Ok(0.0);
    }
    Ok(dl_pdf_split(alpha, p, u, 1.0 - u))
}

/// Same density with the distance to 1 supplied separately, for accurate
/// evaluation next to the right endpoint.
pub fn darling_lamperti_pdf_split(alpha: f64, p: f64, u: f64, one_minus_u: f64) -> Result<f64> {
    check_unit("darling_lamperti_pdf", alpha, p)?;
    if !(u > 0.0 && one_minus_u > 0.0) {
        return Ok(0.0);
    }
    Ok(dl_pdf_split(alpha, p, u, one_minus_u))
}

/// Closed-form distribution function of the Darling-Lamperti law.
pub fn darling_lamperti_cdf(alpha: f64, p: f64, u: f64) -> Result<f64> {
    check_unit("darling_lamperti_cdf", alpha, p)?;
    if u <= 0.0 {
        return Ok(0.0);
    }
    if u >= 1.0 {
        return Ok(1.0);
    }
    // M = 1/(1 + c R) with c^alpha = q/p and R a stable ratio
    let y = (u / (1.0 - u)).powf(alpha) * (1.0 - p) / p;
    crate::specialfn::stable_ratio_power_cdf(alpha, y)
}

/// `E (1 + lambda M)^{-1}` for the Darling-Lamperti variable `M`.
pub fn lamperti_stieltjes(alpha: f64, p: f64, lambda: f64) -> Result<f64> {
    check_unit("lamperti_stieltjes", alpha, p)?;
    if !(lambda > -1.0) {
        return Err(domain("lamperti_stieltjes", "need lambda > -1"));
    }
    let q = 1.0 - p;
    let l = 1.0 + lambda;
    Ok((q + p * l.powf(alpha - 1.0)) / (q + p * l.powf(alpha)))
}

fn check_lambda(func: &'static str, x: &AtomicDistribution, lambda: f64) -> Result<()> {
    if x.values().iter().any(|&v| !(1.0 + lambda * v > 0.0)) {
        return Err(domain(func, "need 1 + lambda x > 0 on the support of X"));
    }
    Ok(())
}

/// `E (1 + lambda X~)^{-theta} = (E (1 + lambda X)^alpha)^{-theta/alpha}`, for
/// `alpha != 0` and `theta != 0`.
pub fn cs_transform_rhs(params: AlphaTheta, x: &AtomicDistribution, lambda: f64) -> Result<f64> {
    let (alpha, theta) = (params.alpha(), params.theta());
    if alpha == 0.0 || theta == 0.0 {
        return Err(Error::InvalidParameters(
            "alpha = 0 or theta = 0: use dirichlet_log_transform or alpha0_transform".into(),
        ));
    }
    check_lambda("cs_transform_rhs", x, lambda)?;
    let inner = x.expect(|v| (1.0 + lambda * v).powf(alpha));
    Ok(inner.powf(-theta / alpha))
}

/// `E (1 + lambda X~)^{-theta}` for `alpha = 0`: `exp(-theta E log(1 + lambda X))`.
pub fn dirichlet_log_transform(theta: f64, x: &AtomicDistribution, lambda: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(domain("dirichlet_log_transform", "theta must be positive"));
    }
    check_lambda("dirichlet_log_transform", x, lambda)?;
    Ok((-theta * x.expect(|v| (1.0 + lambda * v).ln())).exp())
}

/// For `theta = 0`: `(E log(1 + lambda X~), E (1 + lambda X~)^{-1})`.
pub fn alpha0_transform(alpha: f64, x: &AtomicDistribution, lambda: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha0_transform", format!("alpha = {alpha} must lie in (0,1)")));
    }
    check_lambda("alpha0_transform", x, lambda)?;
    let a = x.expect(|v| (1.0 + lambda * v).powf(alpha));
    let b = x.expect(|v| (1.0 + lambda * v).powf(alpha - 1.0));
    Ok((a.ln() / alpha, b / a))
}
