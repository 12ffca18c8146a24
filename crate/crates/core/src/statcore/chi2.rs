//! Central and noncentral χ² distributions.
//!
//! The noncentral CDF and survival function are Poisson mixtures of
//! incomplete gamma functions. Neighbouring gamma terms are linked by
//! `Q(a+1, y) = Q(a, y) + y^a e^{-y}/Γ(a+1)`, so the survival function is
//! accumulated upwards and the CDF downwards; both recurrences only add
//! positive terms and stay accurate deep into either tail.

use super::bessel::log_bessel_i;
use super::gamma::{log_gamma_p, log_gamma_prefactor, log_gamma_q, log_poisson_pmf};
use super::logspace::log_add_exp;
use super::normal::q_inv;
use super::roots::solve_increasing;
use crate::{Error, Result};

fn check(k: f64, lambda: f64) -> Result<()> {
    if !(k > 0.0) || !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "chi-squared needs k > 0, lambda >= 0 (k={k}, lambda={lambda})"
        )));
    }
    Ok(())
}

/// Log density of the central χ²_k.
pub fn log_chi2_pdf(k: f64, x: f64) -> Result<f64> {
    check(k, 0.0)?;
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "chi-squared density needs x > 0, got {x}"
        )));
    }
    let a = 0.5 * k;
    let y = 0.5 * x;
    Ok(-std::f64::consts::LN_2 + log_gamma_prefactor(a, y) + a.ln() - y.ln())
}

/// Log density of the noncentral χ²_k(λ).
pub fn log_noncentral_chi2_pdf(k: f64, lambda: f64, x: f64) -> Result<f64> {
    check(k, lambda)?;
    if lambda == 0.0 {
        return log_chi2_pdf(k, x);
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "chi-squared density needs x > 0, got {x}"
        )));
    }
    let nu = 0.5 * k - 1.0;
    Ok(-std::f64::consts::LN_2 - 0.5 * (x + lambda)
        + 0.5 * nu * (x / lambda).ln()
        + log_bessel_i(nu, (lambda * x).sqrt())?)
}

fn poisson_window(mu: f64) -> (f64, f64) {
    let w = 12.0 * mu.sqrt() + 20.0;
    ((mu - w).floor().max(0.0), (mu + w).ceil())
}

/// `ln P[χ²_k(λ) > x]`.
pub fn noncentral_chi2_log_sf(k: f64, lambda: f64, x: f64) -> Result<f64> {
    check(k, lambda)?;
    let y = 0.5 * x;
    if lambda == 0.0 {
        return log_gamma_q(0.5 * k, y);
    }
    if !(x > 0.0) {
        return Ok(0.0);
    }
    let mu = 0.5 * lambda;
    let (lo, hi) = poisson_window(mu);
    let mut j = lo;
    let mut a = 0.5 * k + j;
    let mut log_q = log_gamma_q(a, y)?;
    let mut acc = f64::NEG_INFINITY;
    loop {
        let c = log_poisson_pmf(j, mu) + log_q;
        acc = log_add_exp(acc, c);
        if j >= hi && (c < acc - 40.0 || log_q >= 0.0) {
            break;
        }
        log_q = log_add_exp(log_q, log_gamma_prefactor(a, y)).min(0.0);
        j += 1.0;
        a += 1.0;
        if j > hi + 1e7 {
            return Err(Error::numerical(
                "noncentral chi-squared tail sum did not terminate",
            ));
        }
    }
    Ok(acc.min(0.0))
}

/// `ln P[χ²_k(λ) <= x]`.
pub fn noncentral_chi2_log_cdf(k: f64, lambda: f64, x: f64) -> Result<f64> {
    check(k, lambda)?;
    let y = 0.5 * x;
    if lambda == 0.0 {
        return log_gamma_p(0.5 * k, y);
    }
    if !(x > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let mu = 0.5 * lambda;
    let (lo, hi) = poisson_window(mu);
    let mut j = hi;
    let mut a = 0.5 * k + j;
    let mut log_p = log_gamma_p(a, y)?;
    let mut acc = f64::NEG_INFINITY;
    loop {
        let c = log_poisson_pmf(j, mu) + log_p;
        acc = log_add_exp(acc, c);
        if j == 0.0 || (j <= lo && c < acc - 40.0) {
            break;
        }
        j -= 1.0;
        a -= 1.0;
        log_p = log_add_exp(log_p, log_gamma_prefactor(a, y)).min(0.0);
    }
    Ok(acc.min(0.0))
}

pub fn noncentral_chi2_cdf(k: f64, lambda: f64, x: f64) -> Result<f64> {
    noncentral_chi2_log_cdf(k, lambda, x).map(f64::exp)
}

pub fn noncentral_chi2_sf(k: f64, lambda: f64, x: f64) -> Result<f64> {
    noncentral_chi2_log_sf(k, lambda, x).map(f64::exp)
}

fn normal_guess(k: f64, lambda: f64, z: f64) -> (f64, f64) {
    let mean = k + lambda;
    let sd = (2.0 * (k + 2.0 * lambda)).sqrt();
    ((mean + z * sd).max(1e-3 * mean), 0.25 * sd)
}

/// Lower quantile: `x` with `P[χ²_k(λ) <= x] = p`.
pub fn noncentral_chi2_quantile(k: f64, lambda: f64, p: f64) -> Result<f64> {
    check(k, lambda)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile needs p in (0,1), got {p}")));
    }
    if p > 0.5 {
        return noncentral_chi2_quantile_upper(k, lambda, 1.0 - p);
    }
    let (x0, step) = normal_guess(k, lambda, -q_inv(p)?);
    let target = p.ln();
    solve_positive(
        |x| noncentral_chi2_log_cdf(k, lambda, x).map(|l| l - target),
        x0,
        step,
    )
}

/// Upper quantile: `x` with `P[χ²_k(λ) > x] = q`.
pub fn noncentral_chi2_quantile_upper(k: f64, lambda: f64, q: f64) -> Result<f64> {
    check(k, lambda)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("quantile needs q in (0,1), got {q}")));
    }
    if q > 0.5 {
        return noncentral_chi2_quantile(k, lambda, 1.0 - q);
    }
    let (x0, step) = normal_guess(k, lambda, q_inv(q)?);
    let target = q.ln();
    solve_positive(
        |x| noncentral_chi2_log_sf(k, lambda, x).map(|l| target - l),
        x0,
        step,
    )
}

fn solve_positive<F: Fn(f64) -> Result<f64>>(f: F, x0: f64, step: f64) -> Result<f64> {
    let mut failure = None;
    let g = |x: f64| {
        if x <= 0.0 {
            // both objectives are -inf or negative here; keep them increasing
            return -1e300 + x;
        }
        match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = solve_increasing(g, x0, step, 1e-12 * x0.abs().max(1.0));
    match (r, failure) {
        (_, Some(e)) => Err(e),
        (Ok(x), None) => Ok(x),
        (Err(e), None) => Err(Error::numerical(format!("chi-squared quantile: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with mpmath (direct Poisson mixture, 40 digits).
    #[test]
    fn density_values() {
        assert!((log_chi2_pdf(2.0, 2.0).unwrap() - (0.5f64.ln() - 1.0)).abs() < 1e-14);
        assert!(
            (log_noncentral_chi2_pdf(2.0, 0.0, 2.0).unwrap() - (0.5f64.ln() - 1.0)).abs() < 1e-14
        );
        assert!(
            (log_noncentral_chi2_pdf(4.0, 3.0, 5.0).unwrap() + 2.274_746_762_491_526_7).abs()
                < 1e-12
        );
        assert!(
            (log_noncentral_chi2_pdf(1.0, 2.0, 0.7).unwrap() + 1.510_860_819_086_760_1).abs()
                < 1e-12
        );
        assert!(log_noncentral_chi2_pdf(3.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn central_matches_closed_form() {
        for &k in &[1.0, 2.0, 7.0, 40.0, 2e4] {
            for &x in &[0.3, 5.0, 40.0, 2.1e4] {
                let closed = (0.5 * k - 1.0) * f64::ln(x)
                    - 0.5 * x
                    - 0.5 * k * std::f64::consts::LN_2
                    - crate::statcore::ln_gamma(0.5 * k);
                let got = log_noncentral_chi2_pdf(k, 0.0, x).unwrap();
                assert!(
                    (got - closed).abs() < 1e-10 * closed.abs().max(1.0),
                    "k={k} x={x}"
                );
            }
        }
    }

    #[test]
    fn density_normalises() {
        let f = |x: f64| log_noncentral_chi2_pdf(6.0, 4.0, x).unwrap().exp();
        let total = crate::statcore::quad::integrate_half_line(f, 0.0, 1e-13).unwrap();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cdf_values() {
        assert!(
            (noncentral_chi2_cdf(2.0, 0.0, 2.0 * std::f64::consts::LN_2).unwrap() - 0.5).abs()
                < 1e-15
        );
        assert!(
            (noncentral_chi2_cdf(4.0, 3.0, 5.0).unwrap() - 0.388_414_915_548_838_4).abs() < 1e-13
        );
        assert!(
            (noncentral_chi2_cdf(10.0, 20.0, 50.0).unwrap() - 0.964_407_177_435_389_9).abs()
                < 1e-13
        );
        assert!(
            (noncentral_chi2_sf(10.0, 20.0, 50.0).unwrap() / 0.035_592_822_564_610_09 - 1.0).abs()
                < 1e-11
        );
        assert!(
            (noncentral_chi2_cdf(100.0, 50.0, 60.0).unwrap() / 2.976_596_810_086_355_6e-9 - 1.0)
                .abs()
                < 1e-10
        );
    }

    #[test]
    fn cdf_and_sf_are_complementary() {
        for &(k, l, x) in &[(3.0, 0.5, 1.0), (200.0, 150.0, 380.0), (4e4, 2.8e4, 6.9e4)] {
            let c = noncentral_chi2_cdf(k, l, x).unwrap();
            let s = noncentral_chi2_sf(k, l, x).unwrap();
            assert!((c + s - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn quantile_round_trip() {
        for &(k, l) in &[(2.0, 0.0), (2.0, 3.0), (100.0, 100.0), (4000.0, 2000.0)] {
            for &p in &[1e-6, 0.01, 0.5, 0.9, 0.999] {
                let x = noncentral_chi2_quantile(k, l, p).unwrap();
                assert!(
                    (noncentral_chi2_cdf(k, l, x).unwrap() - p).abs() <= 1e-9,
                    "k={k} l={l} p={p}"
                );
                let x = noncentral_chi2_quantile_upper(k, l, p).unwrap();
                assert!((noncentral_chi2_sf(k, l, x).unwrap() - p).abs() <= 1e-9);
            }
        }
        assert!(noncentral_chi2_quantile(2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn median_grows_like_mean() {
        let n = 50.0;
        let p = 1.0;
        let m = noncentral_chi2_quantile(2.0 * n, 2.0 * n * p, 0.5).unwrap();
        // the median of a right-skewed law sits a little below its mean
        assert!(m < 2.0 * n * (1.0 + p) && m > 2.0 * n * (1.0 + p) - 2.0);
    }
}
