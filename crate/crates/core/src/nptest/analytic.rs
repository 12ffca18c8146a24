use crate::statcore::{log_q, log_sum_exp, q_inv};
use crate::{Error, Result};

use super::estimate::BetaEstimate;

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("{name} must lie in (0,1), got {p}")));
    }
    Ok(())
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `β_α(N(d,1), N(0,1)) = Q(d + Q⁻¹(α))`.
pub fn beta_gaussian_shift(d: f64, alpha: f64) -> Result<BetaEstimate> {
    check_prob("alpha", alpha)?;
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::domain(format!(
            "shift must be finite and nonnegative, got {d}"
        )));
    }
    BetaEstimate::exact(log_q(d + q_inv(alpha)?))
}

/// `β ≤ e^{-γ}` when the test `{L >= γ}` already has power `α`.
pub fn beta_upper_from_threshold(gamma: f64) -> Result<BetaEstimate> {
    BetaEstimate::upper(-gamma)
}

/// `ln β_α >= -nμ - sqrt(2nv/α) + ln(α/2)` for an `n`-fold product with
/// per-letter LLR mean `μ` and variance `v`.
pub fn beta_lower_mean_var(n: usize, mu: f64, v: f64, alpha: f64) -> Result<BetaEstimate> {
    check_prob("alpha", alpha)?;
    beta_lower_mean_var_with(n, mu, v, alpha, (0.5 * alpha).ln())
}

/// [`beta_lower_mean_var`] with an explicit additive constant in place of
/// `ln(α/2)`.
pub fn beta_lower_mean_var_with(
    n: usize,
    mu: f64,
    v: f64,
    alpha: f64,
    log_const: f64,
) -> Result<BetaEstimate> {
    check_prob("alpha", alpha)?;
    if !mu.is_finite() || !(v >= 0.0) || !v.is_finite() {
        return Err(Error::domain(
            "mean/variance bound needs finite mean and nonnegative variance",
        ));
    }
    let n = n as f64;
    BetaEstimate::lower(-n * mu - (2.0 * n * v / alpha).sqrt() + log_const)
}

/// `ln β_α(P,Q) >= -(D(P‖Q) + h(α))/α`.
pub fn beta_lower_haroutunian(d_kl: f64, alpha: f64) -> Result<BetaEstimate> {
    check_prob("alpha", alpha)?;
    if !(d_kl >= 0.0) {
        return Err(Error::domain(format!(
            "divergence must be nonnegative, got {d_kl}"
        )));
    }
    BetaEstimate::lower(-(d_kl + binary_entropy(alpha)) / alpha)
}

/// `β_α(P,Q) >= β_{β_α(P,R)}(R,Q)` for any auxiliary `R`.
///
/// `beta_rq_at(x)` must return `β_x(R,Q)`; it is called once with
/// `x = β_α(P,R)`.
pub fn beta_variational_lower<F>(beta_pr: BetaEstimate, beta_rq_at: F) -> Result<BetaEstimate>
where
    F: FnOnce(f64) -> Result<BetaEstimate>,
{
    let x = beta_pr.value();
    check_prob("beta_alpha(P,R)", x)?;
    let inner = beta_rq_at(x)?;
    let mut out = inner.with_kind(super::BetaKind::LowerBound);
    out.std_err_log = (inner.std_err_log.powi(2) + beta_pr.std_err_log.powi(2)).sqrt();
    out.n_samples = inner.n_samples.max(beta_pr.n_samples);
    Ok(out)
}

/// A member `R_λ ∝ p^{1-λ} q^λ` of the exponential family through `P`, `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFamilyPath {
    pub lambda: f64,
    /// `λ·D_{1-λ}(P‖Q)` in nats.
    pub log_renyi: f64,
}

/// For `P = N(d,1)`, `Q = N(0,1)`: the mean `(1-λ)d` of `R_λ` and its path
/// record.
pub fn geodesic_gaussian(d: f64, lambda: f64) -> Result<(f64, ExponentialFamilyPath)> {
    check_prob("lambda", lambda)?;
    Ok((
        (1.0 - lambda) * d,
        ExponentialFamilyPath {
            lambda,
            log_renyi: 0.5 * lambda * (1.0 - lambda) * d * d,
        },
    ))
}

/// Mixture bound: `β_{1-λδ₁-(1-λ)δ₂}(λP₁+(1-λ)P₂, Q) <= β_{1-δ₁}(P₁,Q) + β_{1-δ₂}(P₂,Q)`.
///
/// Returns the effective level and the upper bound.
pub fn beta_mixture_upper(
    beta1: BetaEstimate,
    beta2: BetaEstimate,
    lambda: f64,
    delta1: f64,
    delta2: f64,
) -> Result<(f64, BetaEstimate)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!(
            "lambda must lie in [0,1], got {lambda}"
        )));
    }
    check_prob("delta1", delta1)?;
    check_prob("delta2", delta2)?;
    let alpha = 1.0 - lambda * delta1 - (1.0 - lambda) * delta2;
    let mut b = BetaEstimate::upper(log_sum_exp(&[beta1.ln(), beta2.ln()])?)?;
    b.std_err_log = beta1.std_err_log.max(beta2.std_err_log);
    b.n_samples = beta1.n_samples.max(beta2.n_samples);
    Ok((alpha, b))
}

/// `β_τ(P,Q) >= τ / sup dP/dQ`.
pub fn beta_lower_sup_ratio(tau: f64, log_sup_ratio: f64) -> Result<BetaEstimate> {
    check_prob("tau", tau)?;
    if !(log_sup_ratio >= 0.0) {
        return Err(Error::domain(format!(
            "log sup ratio must be nonnegative, got {log_sup_ratio}"
        )));
    }
    BetaEstimate::lower(tau.ln() - log_sup_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statcore::{q_func, LN_2};

    #[test]
    fn gaussian_shift_values() {
        assert!((beta_gaussian_shift(0.0, 0.3).unwrap().value() - 0.3).abs() < 1e-12);
        let b = beta_gaussian_shift(2f64.sqrt(), 0.9).unwrap();
        assert!((b.value() - 0.447_230_349_640_646_98).abs() < 1e-11);
        let b = beta_gaussian_shift(10.0, 0.999).unwrap();
        let direct = log_q(10.0 + q_inv(0.999).unwrap());
        assert_eq!(b.ln(), direct);
        assert!(b.ln() < -20.0);
        assert!(beta_gaussian_shift(1.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_shift_is_monotone() {
        let mut prev = 0.0;
        for i in 1..100 {
            let v = beta_gaussian_shift(1.5, i as f64 / 100.0).unwrap().value();
            assert!(v >= prev);
            prev = v;
        }
        let mut prev = 1.0;
        for i in 0..50 {
            let v = beta_gaussian_shift(i as f64 * 0.2, 0.4).unwrap().value();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn simple_bounds() {
        assert_eq!(beta_upper_from_threshold(0.0).unwrap().ln(), 0.0);
        assert_eq!(beta_upper_from_threshold(10.0).unwrap().ln(), -10.0);
        assert!((beta_lower_mean_var(0, 1.0, 1.0, 0.2).unwrap().ln() - 0.1f64.ln()).abs() < 1e-15);
        let b = beta_lower_mean_var(100, 0.5, 0.0, 0.2).unwrap();
        assert!((b.ln() - (-50.0 + 0.1f64.ln())).abs() < 1e-12);
        assert!((beta_lower_haroutunian(0.0, 0.5).unwrap().ln() + 2.0 * LN_2).abs() < 1e-15);
        assert!((beta_lower_haroutunian(0.7, 1.0 - 1e-12).unwrap().ln() + 0.7).abs() < 1e-9);
        assert!(
            (beta_lower_sup_ratio(0.01, 3.0).unwrap().ln() - (0.01f64.ln() - 3.0)).abs() < 1e-15
        );
        assert!((beta_lower_sup_ratio(0.2, 0.0).unwrap().value() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn haroutunian_with_small_divergence_dominates_shifted_tau() {
        // D <= P with tau >= P gives beta >= e^{-2} tau
        let p = 0.01;
        for &tau in &[0.01, 0.05, 0.2, 0.5] {
            let b = beta_lower_haroutunian(p, tau).unwrap();
            assert!(b.ln() >= -2.0 + f64::ln(tau) - 1e-12, "tau={tau}");
        }
    }

    #[test]
    fn variational_chain_on_geodesic_is_tight() {
        let (m, path) = geodesic_gaussian(1.0, 0.5).unwrap();
        assert_eq!(m, 0.5);
        assert!((path.log_renyi - 0.125).abs() < 1e-15);
        let pr = beta_gaussian_shift(1.0 - m, 0.5).unwrap();
        assert!((pr.value() - 0.308_537_538_725_986_9).abs() < 1e-12);
        let lower = beta_variational_lower(pr, |x| beta_gaussian_shift(m, x)).unwrap();
        assert!((lower.value() - q_func(1.0)).abs() < 1e-9);
        let same = beta_variational_lower(pr, |x| beta_gaussian_shift(0.0, x)).unwrap();
        assert!((same.value() - pr.value()).abs() < 1e-12);
    }

    #[test]
    fn mixture_bound_arithmetic() {
        let b1 = BetaEstimate::exact(-2.0).unwrap();
        let b2 = BetaEstimate::exact(-3.0).unwrap();
        let (a, b) = beta_mixture_upper(b1, b2, 0.5, 0.1, 0.1).unwrap();
        assert!((a - 0.9).abs() < 1e-15);
        assert!((b.value() - ((-2f64).exp() + (-3f64).exp())).abs() < 1e-15);
        let (a, _) = beta_mixture_upper(b1, b2, 1.0, 0.2, 0.4).unwrap();
        assert!((a - 0.8).abs() < 1e-15);
    }

    #[test]
    fn bound_ordering_on_a_gaussian_instance() {
        let d: f64 = 2.0;
        for &alpha in &[0.1, 0.5, 0.9] {
            let exact = beta_gaussian_shift(d, alpha).unwrap().ln();
            let gamma = d * d / 2.0 + d * q_inv(alpha).unwrap();
            let upper = beta_upper_from_threshold(gamma).unwrap().ln();
            let mv = beta_lower_mean_var(1, d * d / 2.0, d * d, alpha)
                .unwrap()
                .ln();
            let har = beta_lower_haroutunian(d * d / 2.0, alpha).unwrap().ln();
            assert!(
                mv <= exact && har <= exact && exact <= upper,
                "alpha={alpha}"
            );
        }
    }
}
