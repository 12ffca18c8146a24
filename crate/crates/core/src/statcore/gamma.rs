//! Regularised incomplete gamma functions in the log domain.

use super::logspace::log1mexp;
use super::normal::q_inv;
use super::roots::solve_increasing;
use crate::{Error, Result};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(a+1) - [(a+½)ln a - a + ½ln 2π]`, the Stirling remainder.
fn stirlerr(a: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if a <= 15.0 {
        return ln_gamma(a + 1.0) - (a + 0.5) * a.ln() + a - HALF_LN_2PI;
    }
    let aa = a * a;
    if a > 500.0 {
        (S0 - S1 / aa) / a
    } else if a > 80.0 {
        (S0 - (S1 - S2 / aa) / aa) / a
    } else if a > 35.0 {
        (S0 - (S1 - (S2 - S3 / aa) / aa) / aa) / a
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / aa) / aa) / aa) / aa) / a
    }
}

/// `a ln(a/x) + x - a`, computed without cancellation when `x ≈ a`.
fn bd0(a: f64, x: f64) -> f64 {
    if (a - x).abs() < 0.1 * (a + x) {
        let mut v = (a - x) / (a + x);
        let mut s = (a - x) * v;
        let mut ej = 2.0 * a * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        a * (a / x).ln() + x - a
    }
}

/// `ln[x^a e^{-x} / Γ(a+1)]` with full relative precision for large `a`.
pub fn log_gamma_prefactor(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if a == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if a == 0.0 {
        return -x;
    }
    if a < 10.0 {
        a * x.ln() - x - ln_gamma(a + 1.0)
    } else {
        -stirlerr(a) - 0.5 * (2.0 * std::f64::consts::PI * a).ln() - bd0(a, x)
    }
}

/// Poisson log-probability `ln P[Pois(mu) = j]`.
pub fn log_poisson_pmf(j: f64, mu: f64) -> f64 {
    log_gamma_prefactor(j, mu)
}

fn log_p_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= x / (a + k);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        k += 1.0;
        if k > 1e7 {
            return Err(Error::numerical("incomplete gamma series did not converge"));
        }
    }
    Ok(log_gamma_prefactor(a, x) + sum.ln())
}

fn log_q_continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut i = 1.0;
    loop {
        let an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
        i += 1.0;
        if i > 1e7 {
            return Err(Error::numerical(
                "incomplete gamma continued fraction did not converge",
            ));
        }
    }
    Ok(a.ln() + log_gamma_prefactor(a, x) + h.ln())
}

fn log_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || x.is_nan() {
        return Err(Error::domain(format!(
            "incomplete gamma needs a > 0, got a={a}, x={x}"
        )));
    }
    if x <= 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if x == f64::INFINITY {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    if x < a + 1.0 {
        let lp = log_p_series(a, x)?;
        Ok((lp, log1mexp(lp.min(0.0))))
    } else {
        let lq = log_q_continued_fraction(a, x)?;
        Ok((log1mexp(lq.min(0.0)), lq))
    }
}

/// `ln P(a, x)`, the log lower regularised incomplete gamma function.
pub fn log_gamma_p(a: f64, x: f64) -> Result<f64> {
    log_pq(a, x).map(|v| v.0)
}

/// `ln Q(a, x)`, the log upper regularised incomplete gamma function.
pub fn log_gamma_q(a: f64, x: f64) -> Result<f64> {
    log_pq(a, x).map(|v| v.1)
}

/// `P[Gamma(shape, 1) <= x]`; for integer shape this is the Erlang CDF.
pub fn regularized_gamma_cdf(shape: f64, x: f64) -> Result<f64> {
    log_gamma_p(shape, x).map(f64::exp)
}

/// `P[Gamma(shape, 1) > x]`.
pub fn regularized_gamma_sf(shape: f64, x: f64) -> Result<f64> {
    log_gamma_q(shape, x).map(f64::exp)
}

fn wilson_hilferty(a: f64, z: f64) -> f64 {
    let c = 1.0 / (9.0 * a);
    (a * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-3 * a.min(1.0))
}

/// Lower quantile: `x` with `P(a, x) = p`.
pub fn gamma_quantile(a: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "gamma_quantile needs p in (0,1), got {p}"
        )));
    }
    let x0 = wilson_hilferty(a, -q_inv(p)?);
    let target = if p <= 0.5 { p.ln() } else { (1.0 - p).ln() };
    let t = solve_increasing(
        |t| {
            let (lp, lq) = log_pq(a, t.exp()).unwrap_or((f64::NAN, f64::NAN));
            if p <= 0.5 {
                lp - target
            } else {
                target - lq
            }
        },
        x0.ln(),
        0.05,
        1e-15,
    )?;
    Ok(t.exp())
}

/// Upper quantile: `x` with `Q(a, x) = q`.
pub fn gamma_quantile_upper(a: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!(
            "gamma_quantile_upper needs q in (0,1), got {q}"
        )));
    }
    if q >= 0.5 {
        return gamma_quantile(a, 1.0 - q);
    }
    let x0 = wilson_hilferty(a, q_inv(q)?);
    let target = q.ln();
    let t = solve_increasing(
        |t| target - log_gamma_q(a, t.exp()).unwrap_or(f64::NAN),
        x0.ln(),
        0.05,
        1e-15,
    )?;
    Ok(t.exp())
}
