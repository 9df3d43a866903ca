use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Gaussian tail `Q(x) = P{N(0,1) > x}`.
pub fn q_function(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of [`q_function`] on `(0, 1)`: an `erfc⁻¹` starting point refined by Newton steps.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError(format!("Q⁻¹ needs p in (0,1), got {p}")));
    }
    if p > 0.5 {
        return Ok(-upper_tail_inverse(1.0 - p));
    }
    Ok(upper_tail_inverse(p))
}

fn upper_tail_inverse(p: f64) -> f64 {
    let mut x = SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..50 {
        let d = phi(x);
        if d <= 0.0 || !x.is_finite() {
            break;
        }
        let step = (q_function(x) - p) / d;
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}
