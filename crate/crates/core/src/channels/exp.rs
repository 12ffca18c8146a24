//! Additive exponential-noise channel `Y = x + Z`, `Z_i ~ Exp(1)`, with
//! inputs `x_i >= 0`, `Σ x_i <= nσ`.
//!
//! The capacity-achieving input puts mass `1/(1+σ)` at zero and is
//! otherwise `Exp` with mean `1+σ`; the induced output is `Exp` with mean
//! `1+σ`. Against that output the joint LLR is
//! `n ln(1+σ) + S_X/(1+σ) - σ S_Z/(1+σ)`, which depends on the input only
//! through `S_X = Σ x_i`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use crate::nptest::{BetaEstimate, LlrDraw, LlrModel, LlrSample};
use crate::statcore::{
    gamma_quantile_upper, log_gamma_p, log_gamma_prefactor, log_sub_exp, log_sum_exp,
    quad::GaussLegendre, regularized_gamma_cdf, StreamRng, LN_2,
};
use crate::{Error, Result};

/// Blocklength and mean input budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpChannelSpec {
    pub n: usize,
    pub sigma: f64,
}

impl ExpChannelSpec {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        if n == 0 || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!(
                "exponential channel needs n >= 1 and sigma > 0 (n={n}, sigma={sigma})"
            )));
        }
        Ok(ExpChannelSpec { n, sigma })
    }

    fn theta(&self) -> f64 {
        1.0 + self.sigma
    }

    /// Probability of a nonzero input letter.
    fn p_on(&self) -> f64 {
        self.sigma / self.theta()
    }

    /// `L` given `S_X = s`: offset, scale and shape of `a - c·Gamma(n)`.
    fn conditional(&self, s: f64) -> LlrDraw {
        let n = self.n as f64;
        LlrDraw::AffineGamma {
            offset: n * self.theta().ln() + s / self.theta(),
            scale: self.p_on(),
            shape: n,
        }
    }

    /// Default window width `ln n`.
    pub fn default_width(&self) -> f64 {
        (self.n as f64).ln()
    }
}

/// `log₂(1+σ)` bits per channel use.
pub fn exp_capacity(sigma: f64) -> f64 {
    sigma.ln_1p() / LN_2
}

/// Input law for the joint test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpInputMode {
    /// Every codeword meets the budget with equality, `S_X = nσ`.
    SphereSum,
    /// i.i.d. capacity-achieving input conditioned on
    /// `nσ - width <= S_X <= nσ`.
    FWindow { width: f64 },
    /// Unconstrained i.i.d. capacity-achieving input.
    Iid,
}

impl ExpInputMode {
    fn window(&self, spec: &ExpChannelSpec) -> Option<(f64, f64)> {
        let top = spec.n as f64 * spec.sigma;
        match *self {
            ExpInputMode::SphereSum => Some((top, top)),
            ExpInputMode::FWindow { width } => Some((top - width, top)),
            ExpInputMode::Iid => None,
        }
    }
}

/// `ln Q_X[S_X ∈ [lo, hi]]` under the i.i.d. capacity-achieving input,
/// summed exactly over the number of nonzero letters.
pub fn exp_window_log_mass(spec: &ExpChannelSpec, lo: f64, hi: f64) -> Result<f64> {
    if !(hi >= lo) {
        return Err(Error::domain("window needs lo <= hi"));
    }
    let n = spec.n as f64;
    let p = spec.p_on();
    let mut terms = Vec::new();
    if lo <= 0.0 && hi >= 0.0 {
        terms.push(n * (1.0 - p).ln());
    }
    for (k, lb) in binomial_support(spec) {
        let a = log_gamma_p(k, hi.max(0.0) / spec.theta())?;
        let b = if lo > 0.0 {
            log_gamma_p(k, lo / spec.theta())?
        } else {
            f64::NEG_INFINITY
        };
        if a > b {
            terms.push(lb + log_sub_exp(a, b));
        }
    }
    if terms.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    log_sum_exp(&terms)
}

fn log_binomial_pmf(n: f64, k: f64, p: f64) -> f64 {
    crate::statcore::ln_gamma(n + 1.0)
        - crate::statcore::ln_gamma(k + 1.0)
        - crate::statcore::ln_gamma(n - k + 1.0)
        + k * p.ln()
        + (n - k) * (-p).ln_1p()
}

/// `(k, ln Binom(n, p)(k))` for `k >= 1` over the non-negligible range.
fn binomial_support(spec: &ExpChannelSpec) -> Vec<(f64, f64)> {
    let n = spec.n as f64;
    let p = spec.p_on();
    let mean = n * p;
    let sd = (n * p * (1.0 - p)).sqrt();
    let lo = (mean - 14.0 * sd - 5.0).floor().max(1.0) as usize;
    let hi = ((mean + 14.0 * sd + 5.0).ceil() as usize).min(spec.n);
    (lo..=hi)
        .map(|k| (k as f64, log_binomial_pmf(n, k as f64, p)))
        .collect()
}

/// Log density of `S_X` at `s > 0` (continuous part).
pub fn exp_input_sum_log_density(spec: &ExpChannelSpec, s: f64) -> f64 {
    let theta = spec.theta();
    let x = s / theta;
    let terms: Vec<f64> = binomial_support(spec)
        .into_iter()
        .map(|(k, lb)| lb + log_gamma_prefactor(k, x) + k.ln() - s.ln())
        .collect();
    log_sum_exp(&terms).unwrap_or(f64::NEG_INFINITY)
}

/// Joint LLR model `L = ln dP_XY/d(P_X Q_Y)` with `Q_Y` the
/// capacity-achieving output. Draws are conditional on `S_X`, the noise
/// sum being integrated analytically.
#[derive(Debug, Clone, Copy)]
pub struct ExpJointLlrModel {
    pub spec: ExpChannelSpec,
    pub mode: ExpInputMode,
    log_acceptance: f64,
}

/// Rejection sampling gives up below this acceptance probability.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Builds the joint LLR model for `mode`.
pub fn exp_joint_llr_model(spec: &ExpChannelSpec, mode: ExpInputMode) -> Result<ExpJointLlrModel> {
    let log_acceptance = match mode.window(spec) {
        Some((lo, hi)) if hi > lo => exp_window_log_mass(spec, lo, hi)?,
        _ => 0.0,
    };
    if log_acceptance < MIN_ACCEPTANCE.ln() {
        return Err(Error::domain(format!(
            "input window acceptance {:.3e} is below {MIN_ACCEPTANCE:e}",
            log_acceptance.exp()
        )));
    }
    Ok(ExpJointLlrModel {
        spec: *spec,
        mode,
        log_acceptance,
    })
}

impl ExpJointLlrModel {
    /// `ln Q_X[F]`; zero for the sphere and unconstrained modes.
    pub fn log_acceptance(&self) -> f64 {
        self.log_acceptance
    }

    fn sample_sum(&self, rng: &mut StreamRng) -> f64 {
        let n = self.spec.n as u64;
        let binom = Binomial::new(n, self.spec.p_on()).expect("valid binomial");
        let k = binom.sample(rng);
        if k == 0 {
            0.0
        } else {
            Gamma::new(k as f64, self.spec.theta())
                .expect("valid gamma")
                .sample(rng)
        }
    }

    /// Draws `(S_X, S_Z)` for the configured input law.
    pub fn sample_sums(&self, rng: &mut StreamRng) -> (f64, f64) {
        let s_x = match self.mode.window(&self.spec) {
            Some((lo, hi)) if hi == lo => hi,
            Some((lo, hi)) => loop {
                let s = self.sample_sum(rng);
                if s >= lo && s <= hi {
                    break s;
                }
            },
            None => self.sample_sum(rng),
        };
        let s_z = Gamma::new(self.spec.n as f64, 1.0)
            .expect("valid gamma")
            .sample(rng);
        (s_x, s_z)
    }

    /// LLR value from the two sums.
    pub fn llr(&self, s_x: f64, s_z: f64) -> f64 {
        let t = self.spec.theta();
        self.spec.n as f64 * t.ln() + s_x / t - self.spec.sigma * s_z / t
    }

    /// Quadrature version of the model: Gauss-Legendre over `S_X`
    /// weighted by its exact density, exact in the noise sum.
    pub fn quadrature_sample(&self, nodes: usize) -> Result<LlrSample> {
        let (lo, hi) = match self.mode.window(&self.spec) {
            Some((lo, hi)) if hi == lo => {
                return LlrSample::weighted(vec![self.spec.conditional(hi)], vec![1.0]);
            }
            Some((lo, hi)) => (lo.max(0.0), hi),
            None => {
                let n = self.spec.n as f64;
                let mean = n * self.spec.sigma;
                let sd = (n * (self.spec.sigma.powi(2) + 2.0 * self.spec.sigma)).sqrt();
                (mean - 12.0 * sd, mean + 14.0 * sd)
            }
        };
        let lo = lo.max(0.0);
        let panels = 8usize;
        let per = nodes.div_ceil(panels).max(4);
        let rule = GaussLegendre::new(per);
        let mut draws = Vec::new();
        let mut weights = Vec::new();
        let width = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + p as f64 * width;
            for (s, w) in rule.mapped(a, a + width) {
                let ld = exp_input_sum_log_density(&self.spec, s);
                draws.push(self.spec.conditional(s));
                weights.push(w * ld.exp());
            }
        }
        if lo == 0.0 {
            // the all-zero input atom
            draws.push(self.spec.conditional(0.0));
            weights.push((self.spec.n as f64 * (1.0 - self.spec.p_on()).ln()).exp());
        }
        LlrSample::weighted(draws, weights)
    }
}

impl LlrModel for ExpJointLlrModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let s_x = self.sample_sums(rng).0;
        self.spec.conditional(s_x)
    }

    fn log_mass(&self) -> f64 {
        // the output law only charges y >= x: E_P[e^{-L}] = E[e^{-S_X/(1+σ)}]
        match self.mode.window(&self.spec) {
            Some((lo, hi)) if hi == lo => -hi / self.spec.theta(),
            _ => f64::NAN,
        }
    }
}

/// Same model with both sums sampled, returning plain LLR values.
#[derive(Debug, Clone, Copy)]
pub struct ExpJointPointModel(pub ExpJointLlrModel);

impl LlrModel for ExpJointPointModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let (s_x, s_z) = self.0.sample_sums(rng);
        LlrDraw::Point(self.0.llr(s_x, s_z))
    }
}

/// `β_{1-ε}(P_{Y|X=x̄}, Q_Y)` for a codeword with `Σ x̄_i = nσ`:
/// `e^{-nσ/(1+σ)} · P[Gamma(n) <= t/(1+σ)]` with `P[Gamma(n) <= t] = 1-ε`.
pub fn exp_converse_beta_exact(spec: &ExpChannelSpec, eps: f64) -> Result<BetaEstimate> {
    exp_codeword_beta(spec, spec.n as f64 * spec.sigma, 1.0 - eps)
}

/// `β_α(P_{Y|X=x}, Q_Y)` for any codeword with `Σ x_i = s`.
pub fn exp_codeword_beta(spec: &ExpChannelSpec, s: f64, alpha: f64) -> Result<BetaEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "level must lie in (0,1), got {alpha}"
        )));
    }
    let n = spec.n as f64;
    let t = gamma_quantile_upper(n, 1.0 - alpha)?;
    BetaEstimate::exact(-s / spec.theta() + log_gamma_p(n, t / spec.theta())?)
}

/// Meta-converse rate `-log₂ β_{1-ε} / n` in bits.
pub fn exp_converse_rate(spec: &ExpChannelSpec, eps: f64) -> Result<f64> {
    Ok(-exp_converse_beta_exact(spec, eps)?.log2() / spec.n as f64)
}

/// `P[Gamma(n) <= x]`, re-exported for the Erlang identities.
pub fn erlang_cdf(n: usize, x: f64) -> Result<f64> {
    regularized_gamma_cdf(n as f64, x)
}

/// A sampled capacity-achieving input letter.
pub fn sample_input_letter<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if rng.random::<f64>() < 1.0 / (1.0 + sigma) {
        0.0
    } else {
        Gamma::new(1.0, 1.0 + sigma)
            .expect("valid gamma")
            .sample(rng)
    }
}
