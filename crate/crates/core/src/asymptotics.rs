//! Closed-form approximations with the remainder terms dropped, and the
//! conversion of rate bounds into minimum energy per bit.

use crate::statcore::{q_inv, LN_2};
use crate::{Error, Result};

/// `E_b/N_0` at a given number of information bits, rate and error
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbN0Point {
    pub k: f64,
    pub rate: f64,
    pub eps: f64,
    pub ebn0: f64,
}

impl EbN0Point {
    pub fn ebn0_db(&self) -> f64 {
        to_db(self.ebn0)
    }
}

/// Low-SNR line parameters: minimum `E_b/N_0` in dB and wideband slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidebandParams {
    pub ebn0_min_db: f64,
    pub s0: f64,
}

impl WidebandParams {
    /// `-1.59 dB` with slope 2.
    pub fn awgn() -> Self {
        WidebandParams {
            ebn0_min_db: to_db(LN_2),
            s0: 2.0,
        }
    }

    /// `-1.59 dB` with slope `2E[|H|²]²/E[|H|⁴] = 1`.
    pub fn rayleigh() -> Self {
        WidebandParams {
            ebn0_min_db: to_db(LN_2),
            s0: 1.0,
        }
    }
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn check(k: f64, eps: f64, rate: f64) -> Result<()> {
    if !(k >= 1.0) || !(eps > 0.0 && eps < 1.0) || !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!(
            "need k >= 1, 0 < eps < 1, R >= 0 (k={k}, eps={eps}, R={rate})"
        )));
    }
    Ok(())
}

fn ebn0_expansion(k: f64, eps: f64, rate: f64, slope: f64) -> Result<EbN0Point> {
    check(k, eps, rate)?;
    let ebn0 = LN_2 + (2.0 * LN_2 / k).sqrt() * q_inv(eps)? + slope * rate;
    Ok(EbN0Point { k, rate, eps, ebn0 })
}

/// AWGN: `ln 2 + sqrt(2 ln 2 / k)·Q⁻¹(ε) + (ln²2 / 2)·R`.
pub fn awgn_ebn0_approx(k: f64, eps: f64, rate: f64) -> Result<EbN0Point> {
    ebn0_expansion(k, eps, rate, 0.5 * LN_2 * LN_2)
}

/// Rayleigh fading with CSIR: `ln 2 + sqrt(2 ln 2 / k)·Q⁻¹(ε) + ln²2·R`.
pub fn fading_ebn0_approx(k: f64, eps: f64, rate: f64) -> Result<EbN0Point> {
    ebn0_expansion(k, eps, rate, LN_2 * LN_2)
}

/// `E_b/N_0` in dB on the low-SNR line: `min + (R/S₀)·10 log₁₀ 2`.
pub fn wideband_line(rate: f64, params: WidebandParams) -> Result<f64> {
    if !(rate >= 0.0) || !(params.s0 > 0.0) {
        return Err(Error::domain(format!(
            "need R >= 0 and S0 > 0 (R={rate}, S0={})",
            params.s0
        )));
    }
    Ok(params.ebn0_min_db + rate / params.s0 * to_db(2.0))
}

/// Exponential-noise channel: `log₂(1+σ) - sqrt(V/n)·Q⁻¹(ε)` bits with
/// `V = σ²/(1+σ)² log₂²e`.
pub fn exp_channel_normal_approx(n: usize, eps: f64, sigma: f64) -> Result<f64> {
    if n == 0 || !(eps > 0.0 && eps < 1.0) || !(sigma > 0.0) {
        return Err(Error::domain(format!(
            "need n >= 1, 0 < eps < 1, sigma > 0 (n={n}, eps={eps}, sigma={sigma})"
        )));
    }
    let v = (sigma / (1.0 + sigma) / LN_2).powi(2);
    Ok(sigma.ln_1p() / LN_2 - (v / n as f64).sqrt() * q_inv(eps)?)
}

/// Normal approximation `C - sqrt(V/n)·Q⁻¹(ε)` from capacity (bits) and
/// dispersion (bits²).
pub fn mimo_rate_normal(capacity: f64, dispersion: f64, n: usize, eps: f64) -> Result<f64> {
    if n == 0 || !(eps > 0.0 && eps < 0.5) || !(dispersion >= 0.0) {
        return Err(Error::domain(format!(
            "need n >= 1, 0 < eps < 1/2, V >= 0 (n={n}, eps={eps}, V={dispersion})"
        )));
    }
    Ok(capacity - (dispersion / n as f64).sqrt() * q_inv(eps)?)
}

/// Range of SNR searched by [`ebn0_from_rate_bound`].
pub const SNR_RANGE: (f64, f64) = (1e-6, 1e3);

/// Smallest SNR (to relative precision `1e-6` in `P`) at which `rate_at`
/// reaches `rate`, with `n = ⌈k/R⌉`; returns `E_b = P/R`.
///
/// `rate_at(n, P)` must be nondecreasing in `P`; evaluators driven by Monte
/// Carlo should reuse one seed across calls. `start` is an initial guess
/// for `P`. Evaluation errors are treated as "rate not reached".
pub fn ebn0_from_rate_bound<F>(
    mut rate_at: F,
    k: f64,
    eps: f64,
    rate: f64,
    start: f64,
) -> Result<(EbN0Point, usize)>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    check(k, eps, rate)?;
    if rate <= 0.0 {
        return Err(Error::domain("rate must be positive"));
    }
    let n = (k / rate).ceil() as usize;
    let (p_min, p_max) = SNR_RANGE;
    // excess rate; evaluation errors count as "not reached" with no value
    let mut excess = |p: f64| -> (bool, Option<f64>) {
        match rate_at(n, p) {
            Ok(r) if r.is_finite() => (r >= rate, Some(r - rate)),
            _ => (false, None),
        }
    };
    let mut hi = start.clamp(p_min, p_max);
    let (mut ok_hi, mut f_hi) = excess(hi);
    let (mut lo, mut f_lo);
    if ok_hi {
        loop {
            lo = (hi / 2.0).max(p_min);
            let (ok, f) = excess(lo);
            f_lo = f;
            if !ok {
                break;
            }
            (hi, f_hi) = (lo, f);
            if lo <= p_min {
                return Err(Error::NoBracket(format!(
                    "rate {rate} reached at the smallest SNR {p_min}"
                )));
            }
        }
    } else {
        loop {
            (lo, f_lo) = (hi, f_hi);
            if hi >= p_max {
                return Err(Error::NoBracket(format!(
                    "rate {rate} not reached for SNR up to {p_max}"
                )));
            }
            hi = (hi * 2.0).min(p_max);
            (ok_hi, f_hi) = excess(hi);
            if ok_hi {
                break;
            }
        }
    }
    // Illinois false position on ln P, bisection when a side has no value
    let mut iterations = 0;
    let mut last_hi: Option<bool> = None;
    while hi / lo - 1.0 > 1e-6 && iterations < 60 {
        let (a, b) = (lo.ln(), hi.ln());
        let x = match (f_lo, f_hi) {
            (Some(fl), Some(fh)) if fh > fl => a - fl * (b - a) / (fh - fl),
            _ => 0.5 * (a + b),
        };
        let mid = x.exp().clamp(lo * (1.0 + 1e-7), hi / (1.0 + 1e-7));
        let (ok, f) = excess(mid);
        if ok {
            (hi, f_hi) = (mid, f);
            if last_hi == Some(true) {
                f_lo = f_lo.map(|v| 0.5 * v);
            }
        } else {
            (lo, f_lo) = (mid, f);
            if last_hi == Some(false) {
                f_hi = f_hi.map(|v| 0.5 * v);
            }
        }
        last_hi = Some(ok);
        iterations += 1;
    }
    Ok((
        EbN0Point {
            k,
            rate,
            eps,
            ebn0: hi / rate,
        },
        iterations,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn awgn_expansion_values() {
        // mpmath at 20 digits
        let p = awgn_ebn0_approx(2000.0, 1e-3, 0.0).unwrap();
        assert!((p.ebn0 - 0.774_505_854_039_348).abs() < 1e-12, "{}", p.ebn0);
        assert!((p.ebn0_db() + 1.1098).abs() < 1e-4);
        let p = awgn_ebn0_approx(2000.0, 1e-3, 0.2).unwrap();
        assert!((p.ebn0 - 0.822_551_155_431_169).abs() < 1e-12);
        assert!((p.ebn0_db() + 0.8485).abs() < 2e-4);
        let p = awgn_ebn0_approx(1e12, 0.5, 0.0).unwrap();
        assert!((p.ebn0_db() + 1.5917).abs() < 1e-4);
    }

    #[test]
    fn fading_expansion_values() {
        let p = fading_ebn0_approx(2000.0, 1e-3, 0.2).unwrap();
        assert!((p.ebn0 - 0.870_596_456_822_989).abs() < 1e-12);
        assert!((p.ebn0_db() + 0.6019).abs() < 2e-4);
        let a = awgn_ebn0_approx(2000.0, 1e-3, 0.0).unwrap();
        let f = fading_ebn0_approx(2000.0, 1e-3, 0.0).unwrap();
        assert_eq!(a.ebn0, f.ebn0);
        // slope of the fading expansion in R is ln²2 on the linear scale
        let f2 = fading_ebn0_approx(2000.0, 1e-3, 0.1).unwrap();
        assert!(((f2.ebn0 - f.ebn0) / 0.1 - LN_2 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn wideband_values() {
        assert!((wideband_line(0.0, WidebandParams::awgn()).unwrap() + 1.5917).abs() < 1e-4);
        let a = wideband_line(0.4, WidebandParams::awgn()).unwrap();
        assert!((a - (-1.5917 + 0.6021)).abs() < 1e-4);
        let r = wideband_line(0.2, WidebandParams::rayleigh()).unwrap();
        assert!((r - (-1.5917 + 0.6021)).abs() < 1e-4);
    }

    #[test]
    fn exp_normal_approximation() {
        let r = exp_channel_normal_approx(500, 1e-3, 1.0).unwrap();
        assert!((r - 0.9003).abs() < 5e-5, "{r}");
        assert!((exp_channel_normal_approx(500, 0.5, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((exp_channel_normal_approx(100_000_000, 1e-3, 1.0).unwrap() - 1.0).abs() < 1e-3);
        assert!(mimo_rate_normal(3.3546, 2.0, 400, 0.4999999).unwrap() > 3.3546 - 1e-7);
    }

    #[test]
    fn solver_inverts_the_expansion() {
        // the expansion read as a rate evaluator: P = R(c + sR) solved for R
        let (k, eps) = (2000.0, 1e-3);
        let c = LN_2 + (2.0 * LN_2 / k).sqrt() * q_inv(eps).unwrap();
        let slope = 0.5 * LN_2 * LN_2;
        let eval = |_: usize, p: f64| Ok((-c + (c * c + 4.0 * slope * p).sqrt()) / (2.0 * slope));
        for rate in [0.1, 0.2, 0.3] {
            let (pt, iterations) = ebn0_from_rate_bound(eval, k, eps, rate, 0.05).unwrap();
            let expect = awgn_ebn0_approx(k, eps, rate).unwrap();
            assert!(
                (pt.ebn0 / expect.ebn0 - 1.0).abs() < 2e-6,
                "{} vs {}",
                pt.ebn0,
                expect.ebn0
            );
            assert!(iterations <= 12, "{iterations}");
        }
        assert!(ebn0_from_rate_bound(|_, _| Ok(0.0), k, eps, 0.2, 1.0).is_err());
        // failed evaluations fall back to bisection
        let flaky = |_: usize, p: f64| {
            if p < 0.3 {
                Err(Error::numerical("probe"))
            } else {
                Ok(p)
            }
        };
        let (pt, _) = ebn0_from_rate_bound(flaky, k, eps, 0.2, 1.0).unwrap();
        assert!((pt.ebn0 * 0.2 / 0.3 - 1.0).abs() < 2e-6, "{}", pt.ebn0);
    }
}
