//! `ln I_ν(z)` for the modified Bessel function of the first kind.

use super::gamma::ln_gamma;
use crate::{Error, Result};

/// Orders at or above this use the Debye uniform expansion.
const DEBYE_MIN_ORDER: f64 = 50.0;

// Debye polynomials u_1..u_5 in t, coefficients in ascending powers.
const U1: [f64; 4] = [0.0, 3.0 / 24.0, 0.0, -5.0 / 24.0];
const U2: [f64; 7] = [
    0.0,
    0.0,
    81.0 / 1152.0,
    0.0,
    -462.0 / 1152.0,
    0.0,
    385.0 / 1152.0,
];
const U3: [f64; 10] = [
    0.0,
    0.0,
    0.0,
    30375.0 / 414720.0,
    0.0,
    -369603.0 / 414720.0,
    0.0,
    765765.0 / 414720.0,
    0.0,
    -425425.0 / 414720.0,
];
const U4: [f64; 13] = [
    0.0,
    0.0,
    0.0,
    0.0,
    4465125.0 / 39813120.0,
    0.0,
    -94121676.0 / 39813120.0,
    0.0,
    349922430.0 / 39813120.0,
    0.0,
    -446185740.0 / 39813120.0,
    0.0,
    185910725.0 / 39813120.0,
];
const U5: [f64; 16] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    1519035525.0 / 6688604160.0,
    0.0,
    -49286948607.0 / 6688604160.0,
    0.0,
    284499769554.0 / 6688604160.0,
    0.0,
    -614135872350.0 / 6688604160.0,
    0.0,
    566098157625.0 / 6688604160.0,
    0.0,
    -188699385875.0 / 6688604160.0,
];

fn poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
}

fn debye(nu: f64, z: f64) -> f64 {
    let w = z / nu;
    let s = (1.0 + w * w).sqrt();
    let t = 1.0 / s;
    // eta = s + ln(w / (1 + s)), written to avoid cancellation for small w
    let eta = s + (w / (1.0 + s)).ln();
    let inv = 1.0 / nu;
    let series = 1.0
        + inv
            * (poly(&U1, t)
                + inv
                    * (poly(&U2, t)
                        + inv * (poly(&U3, t) + inv * (poly(&U4, t) + inv * poly(&U5, t)))));
    nu * eta - 0.5 * (2.0 * std::f64::consts::PI * nu).ln() - 0.5 * s.ln() + series.ln()
}

fn hankel(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * z);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    z - 0.5 * (2.0 * std::f64::consts::PI * z).ln() + sum.ln()
}

fn power_series(nu: f64, z: f64) -> f64 {
    let half = 0.5 * z;
    let q = half * half;
    let peak = (((nu * nu + z * z).sqrt() - nu) * 0.5 - 1.0)
        .round()
        .max(0.0);
    let log_peak = (2.0 * peak + nu) * half.ln() - ln_gamma(peak + 1.0) - ln_gamma(peak + nu + 1.0);
    let mut sum = 1.0;
    let mut t = 1.0;
    let mut j = peak;
    loop {
        t *= q / ((j + 1.0) * (j + 1.0 + nu));
        sum += t;
        j += 1.0;
        if t < 1e-17 * sum {
            break;
        }
    }
    t = 1.0;
    j = peak;
    while j > 0.0 {
        t *= j * (j + nu) / q;
        sum += t;
        j -= 1.0;
        if t < 1e-17 * sum {
            break;
        }
    }
    log_peak + sum.ln()
}

/// `ln I_ν(z)` for `ν > -1`, `z >= 0`.
///
/// Power series around its largest term for moderate arguments, the
/// Hankel expansion for `z >> ν²`, and the Debye uniform expansion for
/// `ν >= 50`.
pub fn log_bessel_i(nu: f64, z: f64) -> Result<f64> {
    if !(nu > -1.0) || !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!(
            "log_bessel_i needs nu > -1, z >= 0 (nu={nu}, z={z})"
        )));
    }
    if z == 0.0 {
        return Ok(if nu == 0.0 {
            0.0
        } else if nu > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
    }
    Ok(if nu >= DEBYE_MIN_ORDER {
        debye(nu, z)
    } else if z >= 30f64.max(nu * nu) {
        hankel(nu, z)
    } else {
        power_series(nu, z)
    })
}
