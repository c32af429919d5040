//! Small numerical helpers shared across modules.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let ss: CompensatedSum = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = ss.value() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `ln C(n, k)` for integer arguments.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// Exact-ish `n!` as f64 (exact for n <= 22).
pub fn factorial(n: u64) -> f64 {
    statrs::function::factorial::factorial(n)
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    statrs::function::factorial::binomial(n, k)
}

/// Multinomial coefficient `n! / prod n_i!`.
pub fn multinomial(parts: &[usize]) -> f64 {
    if let Some(m) = multinomial_exact(parts) {
        return m as f64;
    }
    let n: usize = parts.iter().sum();
    let mut ln = ln_factorial(n as u64);
    for &p in parts {
        ln -= ln_factorial(p as u64);
    }
    ln.exp()
}

fn multinomial_exact(parts: &[usize]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut total: u128 = 0;
    for &p in parts {
        // acc *= C(total + p, p), built incrementally so every step stays integral
        for j in 1..=p as u128 {
            total += 1;
            acc = acc.checked_mul(total)? / j;
        }
    }
    Some(acc)
}
