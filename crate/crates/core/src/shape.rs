//! Shape of the density of a ratio of independent stable variables:
//! the bimodality threshold, the inflection point at the threshold and the
//! stationary points beyond it.

use std::f64::consts::PI;

use crate::error::Result;
use crate::specialfn::stable_ratio_pdf;

/// Half the discriminant of `(1 + a) x^2 + 2 x cos(a pi) + 1 - a`, with `x = r^a`.
/// Stationary points of the ratio density exist where this is positive and `a > 1/2`.
pub fn discriminant_half(alpha: f64) -> f64 {
    let c = (PI * alpha).cos();
    c * c + alpha * alpha - 1.0
}

/// The unique root of [`discriminant_half`] in `(1/2, 1)`, by bisection.
pub fn alpha_critical() -> f64 {
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if discriminant_half(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Location of the inflection point (double root) at the critical exponent.
pub fn inflection_point() -> f64 {
    let a = alpha_critical();
    ((1.0 - a * a).sqrt() / (1.0 + a)).powf(1.0 / a)
}

/// Stationary points `(r_minus, r_plus)` of the ratio density: the local
/// minimum at the smaller and the local maximum at the larger value. `None`
/// when the density is monotone.
pub fn stationary_points(alpha: f64) -> Option<(f64, f64)> {
    let d = discriminant_half(alpha);
    if !(alpha > 0.5 && alpha < 1.0) || d <= 0.0 {
        return None;
    }
    let c = (PI * alpha).cos();
    let s = d.sqrt();
    let x_lo = (-c - s) / (1.0 + alpha);
    let x_hi = (-c + s) / (1.0 + alpha);
    if x_lo <= 0.0 {
        return None;
    }
    Some((x_lo.powf(1.0 / alpha), x_hi.powf(1.0 / alpha)))
}

/// Number of sign changes of the numerical derivative of the ratio density
/// on a log-spaced grid of `points` values spanning `[r_min, r_max]`.
pub fn derivative_sign_changes(alpha: f64, r_min: f64, r_max: f64, points: usize) -> Result<usize> {
    let (l0, l1) = (r_min.ln(), r_max.ln());
    let mut prev_sign = 0i8;
    let mut changes = 0;
    let mut prev = stable_ratio_pdf(alpha, r_min)?;
    for i in 1..points {
        let r = (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp();
        let f = stable_ratio_pdf(alpha, r)?;
        let d = f - prev;
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if prev_sign != 0 && sign != prev_sign {
                changes += 1;
            }
            prev_sign = sign;
        }
        prev = f;
    }
    Ok(changes)
}
