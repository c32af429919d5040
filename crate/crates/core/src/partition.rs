//! Exchangeable random partitions: partition probability functions, block
//! counts, the Chinese restaurant process and Ewens permutations.

use std::fmt;
use std::str::FromStr;

use crate::discrete::{AlphaTheta, Regime};
use crate::error::{domain, Error, Result};
use crate::numeric::{ln_factorial, multinomial, CompensatedSum};
use crate::sampling::RngStream;
use crate::specialfn::{falling_factorial, pochhammer};

/// Largest `n` accepted by [`kn_distribution`].
pub const KN_MAX_N: usize = 25;

/// An ordered tuple of positive block sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidParameters("a composition needs at least one part, all positive".into()));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// The composition with one more element in block `i` (`i = k` opens a new block).
    pub fn extended(&self, i: usize) -> Composition {
        let mut parts = self.parts.clone();
        if i < parts.len() {
            parts[i] += 1;
        } else {
            parts.push(1);
        }
        Composition { parts }
    }
}

impl FromStr for Composition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Composition::new(parts)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

/// All compositions of `n` in lexicographic order of their part sequences.
pub fn compositions(n: usize) -> Compositions {
    Compositions { next: if n == 0 { None } else { Some(vec![1; n]) } }
}

pub struct Compositions {
    next: Option<Vec<usize>>,
}

impl Iterator for Compositions {
    type Item = Composition;
    fn next(&mut self) -> Option<Composition> {
        let cur = self.next.take()?;
        // successor: drop the last part, bump the one before it, refill with ones
        if cur.len() >= 2 {
            let mut nxt = cur.clone();
            let last = nxt.pop().expect("len >= 2");
            *nxt.last_mut().expect("len >= 1") += 1;
            nxt.extend(std::iter::repeat_n(1, last - 1));
            self.next = Some(nxt);
        }
        Some(Composition { parts: cur })
    }
}

/// Integer partitions of `n` as non-increasing part lists.
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Number of distinct orderings of a multiset of parts, `k! / prod c_j!`.
pub fn arrangements(sorted_parts: &[usize]) -> f64 {
    let mut ln = ln_factorial(sorted_parts.len() as u64);
    let mut i = 0;
    while i < sorted_parts.len() {
        let mut j = i;
        while j < sorted_parts.len() && sorted_parts[j] == sorted_parts[i] {
            j += 1;
        }
        ln -= ln_factorial((j - i) as u64);
        i = j;
    }
    ln.exp().round()
}

/// `sum over compositions c of n` of `f(c)` for a function symmetric in the
/// order of parts, evaluated once per integer partition.
pub fn sum_symmetric<F: FnMut(&[usize]) -> f64>(n: usize, mut f: F) -> f64 {
    let mut acc = CompensatedSum::new();
    for p in integer_partitions(n) {
        acc.add(arrangements(&p) * f(&p));
    }
    acc.value()
}

/// Law of an exchangeable random partition, given through its exchangeable
/// partition probability function.
pub trait PartitionStructure {
    /// Probability of one specific set partition of `[n]` whose block sizes are `parts`.
    fn eppf_parts(&self, parts: &[usize]) -> f64;

    fn eppf(&self, c: &Composition) -> f64 {
        self.eppf_parts(&c.parts)
    }

    /// Probability that the blocks, listed in exchangeable random order, have sizes `c`.
    fn ecpf(&self, c: &Composition) -> f64 {
        ecpf_from_eppf(self.eppf_parts(&c.parts), &c.parts)
    }

    fn ecpf_parts(&self, parts: &[usize]) -> f64 {
        ecpf_from_eppf(self.eppf_parts(parts), parts)
    }
}

fn ecpf_from_eppf(eppf: f64, parts: &[usize]) -> f64 {
    let k = parts.len() as u64;
    eppf * multinomial(parts) * (-ln_factorial(k)).exp()
}

fn sorted_desc(parts: &[usize]) -> Vec<usize> {
    let mut v = parts.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// `ln p(n_1, ..., n_k)` for the (alpha, theta) family; `-inf` when the
/// partition is impossible (more than `m` blocks in the finite regime).
pub fn ln_eppf(params: AlphaTheta, parts: &[usize]) -> f64 {
    let (alpha, theta) = (params.alpha(), params.theta());
    let k = parts.len();
    if let Regime::Finite { m } = params.regime() {
        if k > m {
            return f64::NEG_INFINITY;
        }
    }
    let n: usize = parts.iter().sum();
    // summing in a canonical order makes the value exactly symmetric
    let parts = sorted_desc(parts);
    let mut ln = 0.0;
    for i in 1..k {
        ln += (theta + i as f64 * alpha).ln();
    }
    for &ni in &parts {
        for j in 1..ni {
            ln += (j as f64 - alpha).ln();
        }
    }
    for j in 1..n {
        ln -= (theta + j as f64).ln();
    }
    ln
}

pub fn eppf(params: AlphaTheta, c: &Composition) -> f64 {
    params.eppf(c)
}

pub fn ecpf(params: AlphaTheta, c: &Composition) -> f64 {
    params.ecpf(c)
}

impl PartitionStructure for AlphaTheta {
    fn eppf_parts(&self, parts: &[usize]) -> f64 {
        ln_eppf(*self, parts).exp()
    }
}

/// Partition generated by sampling with replacement from `m` equally likely values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformSampling {
    pub m: usize,
}

impl PartitionStructure for UniformSampling {
    fn eppf_parts(&self, parts: &[usize]) -> f64 {
        let n: usize = parts.iter().sum();
        let k = parts.len();
        if k > self.m {
            return 0.0;
        }
        falling_factorial(self.m as f64, k as u32) * (self.m as f64).powi(-(n as i32))
    }

    fn ecpf_parts(&self, parts: &[usize]) -> f64 {
        ecpf_uniform(self.m, parts)
    }
}

/// `m^-n C(m, k) n! / prod n_i!`.
pub fn ecpf_uniform(m: usize, parts: &[usize]) -> f64 {
    let n: usize = parts.iter().sum();
    let k = parts.len();
    if k > m {
        return 0.0;
    }
    crate::numeric::binomial(m as u64, k as u64) * multinomial(parts) * (m as f64).powi(-(n as i32))
}

/// `P(K_n = k)` for `k = 0..=n` (entry 0 is zero for `n >= 1`).
pub fn kn_distribution<P: PartitionStructure + ?Sized>(model: &P, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(domain("kn_distribution", "n must be positive"));
    }
    if n > KN_MAX_N {
        return Err(Error::Guard { what: "n", value: n, limit: KN_MAX_N });
    }
    let mut acc = vec![CompensatedSum::new(); n + 1];
    for p in integer_partitions(n) {
        acc[p.len()].add(arrangements(&p) * model.ecpf_parts(&p));
    }
    Ok(acc.iter().map(|a| a.value()).collect())
}

/// `p(c) - sum_{i=1}^{k+1} p(c^(i+))`; zero for a consistent family.
pub fn consistency_residual<P: PartitionStructure + ?Sized>(model: &P, c: &Composition) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add(model.eppf(c));
    for i in 0..=c.k() {
        acc.add(-model.eppf(&c.extended(i)));
    }
    acc.value()
}

/// Block sizes in order of appearance, as grown by sequential seating.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockState {
    sizes: Vec<usize>,
}

impl BlockState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn composition(&self) -> Option<Composition> {
        Composition::new(self.sizes.clone()).ok()
    }
}

/// Seating probabilities for the next element: entries `0..k` join an
/// existing block, entry `k` opens a new one. Each is a ratio of EPPF values.
pub fn seating_probabilities<P: PartitionStructure + ?Sized>(model: &P, state: &BlockState) -> Vec<f64> {
    let k = state.k();
    if k == 0 {
        return vec![1.0];
    }
    let base = model.eppf_parts(&state.sizes);
    let mut probs = Vec::with_capacity(k + 1);
    let mut parts = state.sizes.clone();
    for i in 0..k {
        parts[i] += 1;
        probs.push(model.eppf_parts(&parts) / base);
        parts[i] -= 1;
    }
    parts.push(1);
    probs.push(model.eppf_parts(&parts) / base);
    probs
}

/// Sequential seating of `n` elements.
pub fn crp_sample<P: PartitionStructure + ?Sized>(model: &P, n: usize, rng: &mut RngStream) -> Result<BlockState> {
    let mut state = BlockState::new();
    for _ in 0..n {
        let probs = seating_probabilities(model, &state);
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("seating probabilities sum to {total}")));
        }
        let u = rng.uniform() * total;
        let mut cum = 0.0;
        let mut pick = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            cum += p;
            if u < cum {
                pick = i;
                break;
            }
        }
        if pick == state.k() {
            state.sizes.push(1);
        } else {
            state.sizes[pick] += 1;
        }
    }
    Ok(state)
}

/// Probability of one specific permutation of `[n]` with `K` cycles under
/// the Ewens(theta) law: `theta^K / (theta)_n`. `cycle_counts[i]` is the number
/// of cycles of length `i + 1`.
pub fn ewens_permutation_prob(theta: f64, cycle_counts: &[usize]) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(domain("ewens_permutation_prob", "theta must be positive"));
    }
    let n: usize = cycle_counts.iter().enumerate().map(|(i, c)| (i + 1) * c).sum();
    let k: usize = cycle_counts.iter().sum();
    Ok(theta.powi(k as i32) / pochhammer(theta, n as u32))
}

/// Probability that an Ewens(theta) permutation has the given cycle type:
/// the per-permutation probability times `n! / prod i^{c_i} c_i!`.
pub fn ewens_cycle_type_prob(theta: f64, cycle_counts: &[usize]) -> Result<f64> {
    let per = ewens_permutation_prob(theta, cycle_counts)?;
    let n: usize = cycle_counts.iter().enumerate().map(|(i, c)| (i + 1) * c).sum();
    let mut ln = ln_factorial(n as u64);
    for (i, &c) in cycle_counts.iter().enumerate() {
        ln -= c as f64 * ((i + 1) as f64).ln() + ln_factorial(c as u64);
    }
    Ok(per * ln.exp())
}
