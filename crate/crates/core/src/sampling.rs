//! Seeded random streams and the elementary samplers.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Streams with the same seed and different ids are independent ChaCha
/// streams; [`RngStream::split`] derives child ids deterministically.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream `k`; depends only on `(seed, stream_id, k)`.
    pub fn split(&self, k: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(k.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RngStream::new(self.seed, id)
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Splits `n` replicates into fixed chunks, each driven by its own child
/// stream, so results do not depend on how chunks are scheduled.
pub fn chunked<T, F>(rng: &RngStream, n: usize, chunk: usize, mut f: F) -> Result<Vec<T>>
where
    F: FnMut(&mut RngStream) -> Result<T>,
{
    let mut out = Vec::with_capacity(n);
    let mut c = 0u64;
    while out.len() < n {
        let mut child = rng.split(c);
        let take = chunk.min(n - out.len());
        for _ in 0..take {
            out.push(f(&mut child)?);
        }
        c += 1;
    }
    Ok(out)
}

/// `ln G` for `G ~ gamma(r, 1)`; stays finite for tiny shapes where `G`
/// itself underflows.
pub fn sample_ln_gamma(r: f64, rng: &mut RngStream) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain("sample_gamma", format!("shape r = {r} must be positive")));
    }
    if r >= 1.0 {
        Ok(marsaglia_tsang(r, rng).ln())
    } else {
        let g = marsaglia_tsang(r + 1.0, rng);
        Ok(g.ln() + rng.uniform().ln() / r)
    }
}

fn marsaglia_tsang(r: f64, rng: &mut RngStream) -> f64 {
    let d = r - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v3 + v3.ln()) {
            return d * v3;
        }
    }
}

/// `gamma(r, 1)` variate.
pub fn sample_gamma(r: f64, rng: &mut RngStream) -> Result<f64> {
    if r >= 1.0 && r.is_finite() {
        return Ok(marsaglia_tsang(r, rng));
    }
    Ok(sample_ln_gamma(r, rng)?.exp())
}

/// `beta(a, b)` variate as `G_a / (G_a + G_b)`.
pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(domain("sample_beta", format!("need a > 0 and b > 0, got ({a}, {b})")));
    }
    if a >= 1.0 && b >= 1.0 {
        let x = marsaglia_tsang(a, rng);
        let y = marsaglia_tsang(b, rng);
        return Ok(x / (x + y));
    }
    let lx = sample_ln_gamma(a, rng)?;
    let ly = sample_ln_gamma(b, rng)?;
    // logistic of the log ratio keeps both tails accurate
    Ok(1.0 / (1.0 + (ly - lx).exp()))
}

/// Positive stable variate with `E exp(-lambda T) = exp(-lambda^alpha)`.
pub fn sample_stable(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("sample_stable", format!("alpha = {alpha} must lie in (0,1)")));
    }
    let u = PI * rng.uniform();
    let e = rng.exponential();
    let ln_t = (alpha * u).sin().ln() + (1.0 - alpha) / alpha * ((1.0 - alpha) * u).sin().ln()
        - u.sin().ln() / alpha
        - (1.0 - alpha) / alpha * e.ln();
    Ok(ln_t.exp())
}

/// `-cos(alpha pi) + sin(alpha pi) C` with `C` standard Cauchy.
pub fn sample_cauchy_alpha(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain("sample_cauchy_alpha", format!("alpha = {alpha} must lie in [0,1]")));
    }
    let (s, c) = (PI * alpha).sin_cos();
    let cauchy = (PI * (rng.uniform() - 0.5)).tan();
    Ok(-c + s * cauchy)
}

/// `alpha log R` for `R` a ratio of independent stable(alpha) variables
/// (logistic when `alpha = 0`), by exact inversion of its distribution function.
pub fn sample_talzol(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(domain("sample_talzol", format!("alpha = {alpha} must lie in [0,1)")));
    }
    let u = rng.uniform();
    if alpha == 0.0 {
        return Ok(u.ln() - (1.0 - u).ln());
    }
    Ok((alpha * PI * u).sin().ln() - (alpha * PI * (1.0 - u)).sin().ln())
}

/// Ratio `T / T'` of independent stable(alpha) variables.
pub fn sample_stable_ratio(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("sample_stable_ratio", format!("alpha = {alpha} must lie in (0,1)")));
    }
    Ok((sample_talzol(alpha, rng)? / alpha).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::mean_and_se;

    #[test]
    fn streams_are_reproducible() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let xs: Vec<f64> = (0..100).map(|_| sample_gamma(0.7, &mut a).unwrap()).collect();
        let ys: Vec<f64> = (0..100).map(|_| sample_gamma(0.7, &mut b).unwrap()).collect();
        assert_eq!(xs, ys);
        let mut c = RngStream::new(7, 4);
        assert_ne!(a.next_u64(), c.next_u64());
        let s1 = RngStream::new(1, 0).split(5);
        let s2 = RngStream::new(1, 0).split(5);
        assert_eq!(s1.stream_id(), s2.stream_id());
    }

    #[test]
    fn gamma_moments() {
        let mut rng = RngStream::new(11, 0);
        for &r in &[0.05, 0.4, 1.0, 3.5] {
            let xs: Vec<f64> = (0..200_000).map(|_| sample_gamma(r, &mut rng).unwrap()).collect();
            let (m, se) = mean_and_se(&xs);
            assert!((m - r).abs() < 4.0 * se, "r={r} mean={m}");
        }
    }

    #[test]
    fn beta_gamma_independence() {
        // G_a/(G_a+G_b) is independent of G_a+G_b
        let mut rng = RngStream::new(3, 0);
        let n = 100_000;
        let (a, b) = (0.7, 1.9);
        let mut xs = Vec::with_capacity(n);
        let mut ss = Vec::with_capacity(n);
        for _ in 0..n {
            let x = sample_gamma(a, &mut rng).unwrap();
            let y = sample_gamma(b, &mut rng).unwrap();
            xs.push(x / (x + y));
            ss.push(x + y);
        }
        let (mx, _) = mean_and_se(&xs);
        let (ms, _) = mean_and_se(&ss);
        let cov: f64 = xs.iter().zip(&ss).map(|(x, s)| (x - mx) * (s - ms)).sum::<f64>() / n as f64;
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n as f64;
        let vs: f64 = ss.iter().map(|s| (s - ms).powi(2)).sum::<f64>() / n as f64;
        let corr = cov / (vx * vs).sqrt();
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr={corr}");
    }

    #[test]
    fn stable_laplace_scaling() {
        // E exp(-s^(1/alpha) T) = exp(-s)
        let mut rng = RngStream::new(5, 0);
        for &alpha in &[0.3, 0.5, 0.8] {
            let ts: Vec<f64> = (0..200_000).map(|_| sample_stable(alpha, &mut rng).unwrap()).collect();
            for &s in &[0.5, 1.0, 2.0] {
                let lam: f64 = f64::powf(s, 1.0 / alpha);
                let ys: Vec<f64> = ts.iter().map(|t| (-lam * t).exp()).collect();
                let (m, se) = mean_and_se(&ys);
                assert!((m - (-s).exp()).abs() < 4.0 * se, "alpha={alpha} s={s} m={m}");
            }
        }
    }

    #[test]
    fn half_stable_is_inverse_gamma() {
        // T_{1/2} has the law of 1/(4 G), G ~ gamma(1/2)
        let mut rng = RngStream::new(9, 0);
        let n = 100_000;
        let ts: Vec<f64> = (0..n).map(|_| sample_stable(0.5, &mut rng).unwrap()).collect();
        let below = ts.iter().filter(|&&t| t <= 1.0).count() as f64 / n as f64;
        // P(1/(4G) <= 1) = P(G >= 1/4) = erfc(1/2)
        let want = 0.47950012218695346;
        assert!((below - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt(), "{below}");
    }

    #[test]
    fn cauchy_alpha_positive_fraction() {
        let mut rng = RngStream::new(13, 0);
        let n = 100_000;
        for &alpha in &[0.25, 0.6] {
            let pos = (0..n).filter(|_| sample_cauchy_alpha(alpha, &mut rng).unwrap() > 0.0).count() as f64 / n as f64;
            assert!((pos - alpha).abs() < 4.0 * (alpha * (1.0 - alpha) / n as f64).sqrt());
        }
    }
}
