//! One-dimensional quadrature: adaptive Gauss-Kronrod for smooth integrands
//! and tanh-sinh for integrable endpoint singularities.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive G7-K15 on a finite interval.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = qk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}]: estimate {total:e}, error {err:e}"
            )));
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, pv, pe) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = qk15(&f, lo, mid);
        let (v2, e2) = qk15(&f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        if !total.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
    }
    // re-sum to shed the drift of the running updates
    let value = parts.iter().map(|p| p.2).sum();
    Ok(Estimate { value, error: err })
}

/// Integral over `[a, inf)` through the map `x = a + t / (1 - t)`.
pub fn gauss_kronrod_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate> {
    gauss_kronrod(
        |t| {
            let u = 1.0 - t;
            f(a + t / u) / (u * u)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Tanh-sinh rule on `[a, b]`. The integrand receives `(x, x - a, b - x)` with
/// both endpoint distances computed without cancellation, so singular factors
/// like `(b - x)^(alpha - 1)` can be evaluated accurately.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Estimate> {
    use std::f64::consts::FRAC_PI_2;
    let len = b - a;
    let eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        // lower = sigma(2s), upper = 1 - sigma(2s), both formed directly
        let e = (-2.0 * s.abs()).exp();
        let small = e / (1.0 + e);
        let (lo_frac, hi_frac) = if s >= 0.0 { (1.0 - small, small) } else { (small, 1.0 - small) };
        let dl = len * lo_frac;
        let dh = len * hi_frac;
        // d sigma(2s)/dt = 2 sigma (1 - sigma) * pi/2 cosh t
        let w = len * 2.0 * lo_frac * hi_frac * FRAC_PI_2 * t.cosh();
        if w == 0.0 || dl == 0.0 || dh == 0.0 {
            return 0.0;
        }
        let x = if dl <= dh { a + dl } else { b - dh };
        w * f(x, dl, dh)
    };
    let t_max = 6.5;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    for level in 1..=12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let cur = sum * h;
        if !cur.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        let diff = (cur - prev).abs();
        if level >= 3 && diff <= rel_tol * cur.abs().max(f64::MIN_POSITIVE) {
            return Ok(Estimate { value: cur, error: diff });
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!("tanh-sinh did not settle on [{a}, {b}]")))
}
