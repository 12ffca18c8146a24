use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Gaussian tail `Q(x) = P[N(0,1) > x]`.
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Log of the standard normal density.
pub fn log_phi(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `ln Q(x)`, accurate far into the upper tail.
///
/// Beyond `x = 8` the Mills ratio is evaluated by its continued fraction,
/// which keeps full relative precision long after `erfc` underflows.
pub fn log_q(x: f64) -> f64 {
    if x < 0.0 {
        return (-q_func(-x)).ln_1p();
    }
    if x <= 8.0 {
        return q_func(x).ln();
    }
    // Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz
    let tiny = 1e-300;
    let mut f = x;
    let (mut c, mut d) = (x, 0.0);
    for k in 1..=200 {
        let a = k as f64;
        d = x + a * d;
        d = if d.abs() < tiny { 1.0 / tiny } else { 1.0 / d };
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    log_phi(x) - f.ln()
}

/// Inverse of [`q_func`]: returns `x` with `Q(x) = p`.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("q_inv needs p in (0,1), got {p}")));
    }
    let mut x = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // Newton polish; in the upper tail work with ln Q for relative accuracy.
    for _ in 0..4 {
        let step = if p < 0.5 {
            let lq = log_q(x);
            // d/dx ln Q = -phi/Q
            (lq - p.ln()) / -(log_phi(x) - lq).exp()
        } else {
            (q_func(x) - p) / -log_phi(x).exp()
        };
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}
