use crate::statcore::{
    log_gamma_p, log_q, log_sum_exp, q_func, q_inv, regularized_gamma_cdf, regularized_gamma_sf,
    roots::solve_increasing, sample_chunks, SeedSpec, StreamRng,
};
use crate::{Error, Result};
use rand_distr::{Distribution, StandardNormal};

use super::estimate::BetaEstimate;

/// Smallest sample count accepted by the public Monte Carlo entry points.
pub const MIN_SAMPLES: usize = 10_000;

/// Effective sample size below which a β estimate is rejected.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;

/// One draw of the log-likelihood ratio `L = ln dP/dQ` under `P`.
///
/// Besides plain values, a draw may be a conditional law of `L` given the
/// latent variables of the model; tails are then averaged analytically,
/// which removes the noise of the innermost sampling layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LlrDraw {
    /// `L = value`.
    Point(f64),
    /// `L ~ N(mean, var)`.
    Gaussian { mean: f64, var: f64 },
    /// `L = offset - scale·G` with `G ~ Gamma(shape, 1)` and `0 < scale < 1`.
    AffineGamma { offset: f64, scale: f64, shape: f64 },
    /// `L = value` drawn from a proposal law, with importance weight
    /// `e^{log_weight} = dP/d(proposal)`. Tail functionals return the
    /// weighted contribution rather than a probability.
    Weighted { value: f64, log_weight: f64 },
}

impl LlrDraw {
    /// `N(v/2, v)`: the LLR of a Gaussian mean shift with `v = 2‖Δ‖²`.
    pub fn gaussian_shift(v: f64) -> LlrDraw {
        LlrDraw::Gaussian {
            mean: 0.5 * v,
            var: v,
        }
    }

    fn gamma_arg(offset: f64, scale: f64, g: f64) -> f64 {
        (offset - g) / scale
    }

    /// `P[L > g]`.
    pub fn upper_tail(&self, g: f64) -> f64 {
        match *self {
            LlrDraw::Point(l) => (l > g) as u8 as f64,
            LlrDraw::Weighted { value, log_weight } => (value > g) as u8 as f64 * log_weight.exp(),
            LlrDraw::Gaussian { mean, var } if var > 0.0 => q_func((g - mean) / var.sqrt()),
            LlrDraw::Gaussian { mean, .. } => (mean > g) as u8 as f64,
            LlrDraw::AffineGamma {
                offset,
                scale,
                shape,
            } => {
                let t = Self::gamma_arg(offset, scale, g);
                if t <= 0.0 {
                    0.0
                } else {
                    regularized_gamma_cdf(shape, t).unwrap_or(f64::NAN)
                }
            }
        }
    }

    /// `P[L <= g]`.
    pub fn lower_tail(&self, g: f64) -> f64 {
        match *self {
            LlrDraw::Point(l) => (l <= g) as u8 as f64,
            LlrDraw::Weighted { value, log_weight } => (value <= g) as u8 as f64 * log_weight.exp(),
            LlrDraw::Gaussian { mean, var } if var > 0.0 => q_func((mean - g) / var.sqrt()),
            LlrDraw::Gaussian { mean, .. } => (mean <= g) as u8 as f64,
            LlrDraw::AffineGamma {
                offset,
                scale,
                shape,
            } => {
                let t = Self::gamma_arg(offset, scale, g);
                if t <= 0.0 {
                    1.0
                } else {
                    regularized_gamma_sf(shape, t).unwrap_or(f64::NAN)
                }
            }
        }
    }

    /// `ln E[e^{-L} 1{L > g}]`.
    pub fn log_weighted_upper(&self, g: f64) -> f64 {
        match *self {
            LlrDraw::Point(l) => {
                if l > g {
                    -l
                } else {
                    f64::NEG_INFINITY
                }
            }
            LlrDraw::Weighted { value, log_weight } => {
                LlrDraw::Point(value).log_weighted_upper(g) + log_weight
            }
            LlrDraw::Gaussian { mean, var } if var > 0.0 => {
                let s = var.sqrt();
                -mean + 0.5 * var + log_q((g - mean) / s + s)
            }
            LlrDraw::Gaussian { mean, .. } => LlrDraw::Point(mean).log_weighted_upper(g),
            LlrDraw::AffineGamma {
                offset,
                scale,
                shape,
            } => {
                let t = Self::gamma_arg(offset, scale, g);
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -offset - shape * (-scale).ln_1p()
                        + log_gamma_p(shape, (1.0 - scale) * t).unwrap_or(f64::NAN)
                }
            }
        }
    }

    /// `ln E[e^{-L}]`.
    pub fn log_weight(&self) -> f64 {
        match *self {
            LlrDraw::Point(l) => -l,
            LlrDraw::Weighted { value, log_weight } => log_weight - value,
            LlrDraw::Gaussian { mean, var } => -mean + 0.5 * var,
            LlrDraw::AffineGamma {
                offset,
                scale,
                shape,
            } => -offset - shape * (-scale).ln_1p(),
        }
    }

    /// Conditional mean of `L` given the draw (the proposal value for
    /// weighted draws).
    pub fn mean(&self) -> f64 {
        match *self {
            LlrDraw::Point(l) | LlrDraw::Weighted { value: l, .. } => l,
            LlrDraw::Gaussian { mean, .. } => mean,
            LlrDraw::AffineGamma {
                offset,
                scale,
                shape,
            } => offset - scale * shape,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            LlrDraw::Point(_) | LlrDraw::Weighted { .. } => 0.0,
            LlrDraw::Gaussian { var, .. } => var,
            LlrDraw::AffineGamma { scale, shape, .. } => scale * scale * shape,
        }
    }

    /// Importance weight of the draw under `P`.
    pub fn importance_weight(&self) -> f64 {
        match *self {
            LlrDraw::Weighted { log_weight, .. } => log_weight.exp(),
            _ => 1.0,
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            LlrDraw::Point(l) => !l.is_nan() && l != f64::NEG_INFINITY,
            LlrDraw::Weighted { value, log_weight } => {
                !value.is_nan()
                    && value != f64::NEG_INFINITY
                    && !log_weight.is_nan()
                    && log_weight < f64::INFINITY
            }
            LlrDraw::Gaussian { mean, var } => mean.is_finite() && var.is_finite() && var >= 0.0,
            LlrDraw::AffineGamma {
                offset,
                scale,
                shape,
            } => offset.is_finite() && scale > 0.0 && scale < 1.0 && shape > 0.0,
        }
    }
}

/// A source of i.i.d. LLR draws under the first hypothesis.
pub trait LlrModel: Sync {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw;

    /// `ln E_P[e^{-L}] = ln Q[dP/dQ > 0]`; zero when `Q` is absolutely
    /// continuous with respect to `P`.
    fn log_mass(&self) -> f64 {
        0.0
    }
}

/// `P = N(d, 1)` against `Q = N(0, 1)`: `L = d²/2 + dZ` sampled under `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShiftModel {
    pub d: f64,
}

impl LlrModel for GaussianShiftModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let z: f64 = StandardNormal.sample(rng);
        LlrDraw::Point(0.5 * self.d * self.d + self.d * z)
    }
}

/// NP threshold for the test `1{L > γ} + randomization·1{L = γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpThreshold {
    pub gamma: f64,
    pub achieved_alpha: f64,
    pub randomization: f64,
    /// Every sample took the same value; the test is pure randomization.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
enum Repr {
    /// Values sorted in descending order with running `ln Σ e^{-v}` and
    /// `ln Σ e^{-2v}` over the first `i` entries.
    Empirical {
        desc: Vec<f64>,
        cum_w1: Vec<f64>,
        cum_w2: Vec<f64>,
    },
    Conditional {
        draws: Vec<LlrDraw>,
        log_weights: Option<Vec<f64>>,
    },
}

/// A set of LLR draws together with the sample-based tail functionals.
#[derive(Debug, Clone)]
pub struct LlrSample {
    repr: Repr,
    n: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

fn running_lse(values: impl Iterator<Item = f64>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = f64::NEG_INFINITY;
    out.push(acc);
    for v in values {
        acc = crate::statcore::log_add_exp(acc, v);
        out.push(acc);
    }
    out
}

impl LlrSample {
    /// Wraps i.i.d. draws. Samples made only of point values use the sorted
    /// empirical representation.
    pub fn from_draws(draws: Vec<LlrDraw>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::domain("empty LLR sample"));
        }
        if let Some(bad) = draws.iter().find(|d| !d.is_valid()) {
            return Err(Error::numerical(format!("invalid LLR draw {bad:?}")));
        }
        let n = draws.len();
        if draws.iter().all(|d| matches!(d, LlrDraw::Point(_))) {
            let mut desc: Vec<f64> = draws.iter().map(|d| d.mean()).collect();
            desc.sort_by(|a, b| b.total_cmp(a));
            let cum_w1 = running_lse(desc.iter().map(|v| -v), n);
            let cum_w2 = running_lse(desc.iter().map(|v| -2.0 * v), n);
            return Ok(LlrSample {
                repr: Repr::Empirical {
                    desc,
                    cum_w1,
                    cum_w2,
                },
                n,
            });
        }
        Ok(LlrSample {
            repr: Repr::Conditional {
                draws,
                log_weights: None,
            },
            n,
        })
    }

    /// Draws with quadrature weights (normalised internally). Functionals
    /// become deterministic weighted sums and carry no sampling error.
    pub fn weighted(draws: Vec<LlrDraw>, weights: Vec<f64>) -> Result<Self> {
        if draws.is_empty() || draws.len() != weights.len() {
            return Err(Error::domain(
                "weighted sample needs matching nonempty draws and weights",
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite())
            || draws.iter().any(|d| !d.is_valid())
        {
            return Err(Error::numerical("invalid weighted LLR sample"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::numerical("weights sum to zero"));
        }
        let log_weights = weights.iter().map(|w| (w / total).ln()).collect();
        let n = draws.len();
        Ok(LlrSample {
            repr: Repr::Conditional {
                draws,
                log_weights: Some(log_weights),
            },
            n,
        })
    }

    /// Samples `n` draws from `model` on the stream `seed`.
    pub fn draw<M: LlrModel + ?Sized>(model: &M, n: usize, seed: SeedSpec) -> Result<Self> {
        Self::from_draws(sample_chunks(seed, n, |rng| model.draw(rng)))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// True when functionals are quadrature sums rather than sample means.
    pub fn is_weighted(&self) -> bool {
        matches!(
            self.repr,
            Repr::Conditional {
                log_weights: Some(_),
                ..
            }
        )
    }

    fn average<F: Fn(&LlrDraw) -> f64>(
        draws: &[LlrDraw],
        log_weights: &Option<Vec<f64>>,
        f: F,
    ) -> f64 {
        match log_weights {
            Some(lw) => draws.iter().zip(lw).map(|(d, w)| w.exp() * f(d)).sum(),
            None => draws.iter().map(&f).sum::<f64>() / draws.len() as f64,
        }
    }

    fn count_greater(desc: &[f64], g: f64) -> usize {
        desc.partition_point(|&v| v > g)
    }

    fn count_at_least(desc: &[f64], g: f64) -> usize {
        desc.partition_point(|&v| v >= g)
    }

    /// `P[L > g]` under the sample measure.
    pub fn upper_tail(&self, g: f64) -> f64 {
        match &self.repr {
            Repr::Empirical { desc, .. } => Self::count_greater(desc, g) as f64 / self.n as f64,
            Repr::Conditional { draws, log_weights } => {
                Self::average(draws, log_weights, |d| d.upper_tail(g))
            }
        }
    }

    /// `P[L <= g]` under the sample measure.
    pub fn lower_tail(&self, g: f64) -> f64 {
        match &self.repr {
            Repr::Empirical { desc, .. } => {
                (self.n - Self::count_greater(desc, g)) as f64 / self.n as f64
            }
            Repr::Conditional { draws, log_weights } => {
                Self::average(draws, log_weights, |d| d.lower_tail(g))
            }
        }
    }

    /// `P[L < g]` under the sample measure.
    pub fn strict_lower_tail(&self, g: f64) -> f64 {
        match &self.repr {
            Repr::Empirical { desc, .. } => {
                (self.n - Self::count_at_least(desc, g)) as f64 / self.n as f64
            }
            Repr::Conditional { .. } => self.lower_tail(g),
        }
    }

    /// Per-draw log contributions to `E[e^{-L} 1{L >= g}]`, as
    /// `(ln mean, ln mean of squares, effective count)`.
    fn weighted_moments(&self, g: f64, tie_weight: f64) -> Result<(f64, f64)> {
        let ln_n = (self.n as f64).ln();
        match &self.repr {
            Repr::Empirical {
                desc,
                cum_w1,
                cum_w2,
            } => {
                let gt = Self::count_greater(desc, g);
                let eq = Self::count_at_least(desc, g) - gt;
                let mut s1 = cum_w1[gt];
                let mut s2 = cum_w2[gt];
                if eq > 0 && tie_weight > 0.0 {
                    let e = eq as f64;
                    s1 = crate::statcore::log_add_exp(s1, (tie_weight * e).ln() - g);
                    s2 = crate::statcore::log_add_exp(
                        s2,
                        (tie_weight * tie_weight * e).ln() - 2.0 * g,
                    );
                }
                Ok((s1 - ln_n, s2 - ln_n))
            }
            Repr::Conditional { draws, log_weights } => {
                let lw: Vec<f64> = draws.iter().map(|d| d.log_weighted_upper(g)).collect();
                if lw.iter().any(|v| v.is_nan()) {
                    return Err(Error::numerical("NaN in conditional tail evaluation"));
                }
                match log_weights {
                    Some(w) => {
                        let a: Vec<f64> = lw.iter().zip(w).map(|(l, w)| l + w).collect();
                        let b: Vec<f64> = lw.iter().zip(w).map(|(l, w)| 2.0 * l + w).collect();
                        Ok((log_sum_exp(&a)?, log_sum_exp(&b)?))
                    }
                    None => {
                        let b: Vec<f64> = lw.iter().map(|l| 2.0 * l).collect();
                        Ok((log_sum_exp(&lw)? - ln_n, log_sum_exp(&b)? - ln_n))
                    }
                }
            }
        }
    }

    fn estimate_from_moments(&self, m1: f64, m2: f64) -> Result<BetaEstimate> {
        if self.is_weighted() {
            return BetaEstimate::exact(m1);
        }
        let n = self.n as f64;
        if m1 == f64::NEG_INFINITY {
            return Err(Error::CiTooWide { ess: 0.0 });
        }
        let ess = n * (2.0 * m1 - m2).exp();
        if ess < MIN_EFFECTIVE_SAMPLES {
            return Err(Error::CiTooWide { ess });
        }
        let var_log = ((m2 - 2.0 * m1).exp() - 1.0).max(0.0) / n;
        BetaEstimate::mc(m1, var_log.sqrt(), self.n)
    }

    /// `ln E[e^{-L} 1{L >= g}]` with its standard error (zero when weighted).
    pub fn log_weighted_tail(&self, g: f64) -> Result<(f64, f64)> {
        let (m1, m2) = self.weighted_moments(g, 1.0)?;
        if self.is_weighted() || m1 == f64::NEG_INFINITY {
            return Ok((m1, 0.0));
        }
        let se = (((m2 - 2.0 * m1).exp() - 1.0).max(0.0) / self.n as f64).sqrt();
        Ok((m1, se))
    }

    /// `ln E[e^{-L}]` with its standard error; equals `ln Q[dP/dQ > 0]`.
    pub fn log_mean_weight(&self) -> Result<(f64, f64)> {
        self.log_weighted_tail(f64::NEG_INFINITY)
    }

    /// NP threshold with `P[L > γ] + r·P[L = γ] = α` on the sample measure.
    pub fn threshold(&self, alpha: f64) -> Result<NpThreshold> {
        check_alpha(alpha)?;
        match &self.repr {
            Repr::Empirical { desc, .. } => {
                let n = self.n as f64;
                let target = alpha * n;
                let k = (target.floor() as usize).min(self.n - 1);
                let gamma = desc[k];
                let gt = Self::count_greater(desc, gamma);
                let eq = Self::count_at_least(desc, gamma) - gt;
                let r = ((target - gt as f64) / eq as f64).clamp(0.0, 1.0);
                Ok(NpThreshold {
                    gamma,
                    achieved_alpha: (gt as f64 + r * eq as f64) / n,
                    randomization: r,
                    degenerate: desc[0] == desc[self.n - 1],
                })
            }
            Repr::Conditional { draws, log_weights } => {
                let gamma = self.solve_level(alpha)?;
                let achieved = Self::average(draws, log_weights, |d| d.upper_tail(gamma));
                Ok(NpThreshold {
                    gamma,
                    achieved_alpha: achieved,
                    randomization: 0.0,
                    degenerate: false,
                })
            }
        }
    }

    fn spread(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Empirical { desc, .. } => {
                (desc[self.n / 2], (desc[0] - desc[self.n - 1]).max(1e-12))
            }
            Repr::Conditional { draws, log_weights } => {
                let mass = Self::average(draws, log_weights, |d| d.importance_weight());
                let mean =
                    Self::average(draws, log_weights, |d| d.importance_weight() * d.mean()) / mass;
                let second = Self::average(draws, log_weights, |d| {
                    d.importance_weight() * (d.variance() + (d.mean() - mean).powi(2))
                }) / mass;
                (mean, second.sqrt().max(1e-9 * mean.abs()).max(1e-12))
            }
        }
    }

    fn solve_level(&self, alpha: f64) -> Result<f64> {
        let (center, sd) = self.spread();
        let floor = -740.0;
        let tol = 1e-12 * center.abs().max(1.0);
        // start from the normal-approximation quantile
        let start = center + sd * q_inv(alpha)?;
        let x = if alpha <= 0.5 {
            let target = alpha.ln();
            solve_increasing(
                |g| target - self.upper_tail(g).ln().max(floor),
                start,
                0.25 * sd,
                tol,
            )?
        } else {
            let target = (-alpha).ln_1p();
            solve_increasing(
                |g| self.lower_tail(g).ln().max(floor) - target,
                start,
                0.25 * sd,
                tol,
            )?
        };
        Ok(x)
    }

    /// Variance of the per-draw contribution to the tail estimate that
    /// fixes the threshold at level `alpha` (`P[L > g]` for `alpha <= ½`,
    /// `P[L <= g]` otherwise); zero for quadrature samples.
    pub fn tail_variance(&self, g: f64, alpha: f64) -> f64 {
        match &self.repr {
            Repr::Empirical { .. } => {
                let p = self.upper_tail(g);
                p * (1.0 - p)
            }
            Repr::Conditional {
                log_weights: Some(_),
                ..
            } => 0.0,
            Repr::Conditional {
                draws,
                log_weights: None,
            } => {
                let t: Vec<f64> = if alpha <= 0.5 {
                    draws.iter().map(|d| d.upper_tail(g)).collect()
                } else {
                    draws.iter().map(|d| d.lower_tail(g)).collect()
                };
                let m = t.iter().sum::<f64>() / t.len() as f64;
                t.iter().map(|x| (x - m).powi(2)).sum::<f64>() / t.len() as f64
            }
        }
    }

    /// Relative variances `Var/mean²` of the per-draw contributions to
    /// `E[e^{-L} 1{L >= g}]` and to the tail at level `alpha`. Small values
    /// mean the sampling law suits the threshold `g`.
    pub fn relative_variances(&self, g: f64, alpha: f64) -> Result<(f64, f64)> {
        let (m1, m2) = self.weighted_moments(g, 1.0)?;
        let beta_rv = if m1 == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            (m2 - 2.0 * m1).exp() - 1.0
        };
        let p = if alpha <= 0.5 {
            self.upper_tail(g)
        } else {
            self.lower_tail(g)
        };
        let tail_rv = if p > 0.0 {
            self.tail_variance(g, alpha) / (p * p)
        } else {
            f64::INFINITY
        };
        Ok((beta_rv, tail_rv))
    }

    /// Smallest `x` with `P[L <= x] >= p`.
    pub fn lower_quantile(&self, p: f64) -> Result<f64> {
        check_alpha(p)?;
        match &self.repr {
            Repr::Empirical { desc, .. } => {
                let k = ((p * self.n as f64).ceil() as usize).clamp(1, self.n);
                Ok(desc[self.n - k])
            }
            Repr::Conditional { .. } => self.solve_level(1.0 - p),
        }
    }

    /// β of the randomized test `thr`, as an MC estimate (or a quadrature
    /// value for weighted samples).
    pub fn beta(&self, thr: &NpThreshold) -> Result<BetaEstimate> {
        let (m1, m2) = match &self.repr {
            Repr::Empirical { .. } => self.weighted_moments(thr.gamma, thr.randomization)?,
            Repr::Conditional { .. } => self.weighted_moments(thr.gamma, 1.0)?,
        };
        self.estimate_from_moments(m1, m2)
    }
}

/// β estimator holding a threshold sample and an independent integral
/// sample, so that β can be queried at many `α` without resampling.
#[derive(Debug, Clone)]
pub struct BetaEstimator {
    threshold_sample: LlrSample,
    integral_sample: Option<LlrSample>,
}

impl BetaEstimator {
    /// Draws both samples from `model`, `n` draws each, on child streams
    /// 0 and 1 of `seed`.
    pub fn new<M: LlrModel + ?Sized>(model: &M, n: usize, seed: SeedSpec) -> Result<Self> {
        if n < MIN_SAMPLES {
            return Err(Error::domain(format!(
                "at least {MIN_SAMPLES} samples required, got {n}"
            )));
        }
        Ok(BetaEstimator {
            threshold_sample: LlrSample::draw(model, n, seed.child(0))?,
            integral_sample: Some(LlrSample::draw(model, n, seed.child(1))?),
        })
    }

    pub fn from_samples(threshold: LlrSample, integral: LlrSample) -> Self {
        BetaEstimator {
            threshold_sample: threshold,
            integral_sample: Some(integral),
        }
    }

    /// Uses one sample for both roles (quadrature samples).
    pub fn from_single(sample: LlrSample) -> Self {
        BetaEstimator {
            threshold_sample: sample,
            integral_sample: None,
        }
    }

    pub fn sample(&self) -> &LlrSample {
        self.integral_sample
            .as_ref()
            .unwrap_or(&self.threshold_sample)
    }

    pub fn threshold_sample(&self) -> &LlrSample {
        &self.threshold_sample
    }

    pub fn threshold(&self, alpha: f64) -> Result<NpThreshold> {
        self.threshold_sample.threshold(alpha)
    }

    /// β at level `alpha`. The reported standard error combines the
    /// integral noise with the threshold noise, `Var(tail)·e^{-2γ}/(N β²)`
    /// by the delta method.
    pub fn beta(&self, alpha: f64) -> Result<BetaEstimate> {
        let thr = self.threshold(alpha)?;
        let mut b = self.sample().beta(&thr)?;
        if self.integral_sample.is_some() && !thr.degenerate {
            let tv = self.threshold_sample.tail_variance(thr.gamma, alpha);
            let n = self.threshold_sample.len() as f64;
            let extra = tv * (-2.0 * (thr.gamma + b.ln())).exp() / n;
            b.std_err_log = (b.std_err_log.powi(2) + extra).sqrt();
        }
        Ok(b)
    }
}

/// Picks, among `candidates`, the sampling law under which the MC estimate
/// of `β_alpha` has the smallest relative variance, judged on pilot samples
/// of size `pilot`. The first candidate is the untilted model and seeds the
/// threshold guess; two refinement rounds follow.
pub fn calibrate_proposal<T, M, F>(
    make: F,
    candidates: &[T],
    alpha: f64,
    pilot: usize,
    seed: SeedSpec,
) -> Result<T>
where
    T: Copy,
    M: LlrModel,
    F: Fn(T) -> M,
{
    check_alpha(alpha)?;
    let first = *candidates
        .first()
        .ok_or_else(|| Error::domain("no proposal candidates"))?;
    let mut best = first;
    let mut gamma = LlrSample::draw(&make(first), pilot, seed.child(0))?
        .threshold(alpha)?
        .gamma;
    for round in 1..3u64 {
        let mut best_score = f64::INFINITY;
        let mut best_gamma = gamma;
        for (i, &c) in candidates.iter().enumerate() {
            let sample = LlrSample::draw(&make(c), pilot, seed.child(round).child(i as u64))?;
            let (b, t) = sample.relative_variances(gamma, alpha)?;
            let score = b.max(t);
            if score < best_score {
                best_score = score;
                best = c;
                best_gamma = sample.threshold(alpha).map(|t| t.gamma).unwrap_or(gamma);
            }
        }
        gamma = best_gamma;
    }
    Ok(best)
}

/// Empirical NP threshold at level `alpha` from `n_samples` draws.
pub fn np_threshold<M: LlrModel + ?Sized>(
    model: &M,
    alpha: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<NpThreshold> {
    check_alpha(alpha)?;
    if n_samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "at least {MIN_SAMPLES} samples required, got {n_samples}"
        )));
    }
    LlrSample::draw(model, n_samples, seed.child(0))?.threshold(alpha)
}

/// Monte Carlo estimate of `β_α(P, Q)` by change of measure: threshold and
/// integral come from independent child streams of `seed`.
pub fn beta_mc<M: LlrModel + ?Sized>(
    model: &M,
    alpha: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<BetaEstimate> {
    check_alpha(alpha)?;
    BetaEstimator::new(model, n_samples, seed)?.beta(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nptest::beta_gaussian_shift;

    struct Constant(f64);
    impl LlrModel for Constant {
        fn draw(&self, _: &mut StreamRng) -> LlrDraw {
            LlrDraw::Point(self.0)
        }
    }

    struct ShiftConditional(f64);
    impl LlrModel for ShiftConditional {
        fn draw(&self, _: &mut StreamRng) -> LlrDraw {
            LlrDraw::gaussian_shift(self.0 * self.0)
        }
    }

    #[test]
    fn constant_llr_threshold_is_pure_randomization() {
        let t = np_threshold(&Constant(1.5), 0.3, MIN_SAMPLES, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(t.gamma, 1.5);
        assert!((t.randomization - 0.3).abs() < 1e-12);
        assert!(t.degenerate);
        let b = beta_mc(&Constant(0.0), 0.37, MIN_SAMPLES, SeedSpec::new(1, 0)).unwrap();
        assert!((b.value() - 0.37).abs() < 1e-15);
        assert!(b.std_err_log < 1e-8);
    }

    #[test]
    fn extreme_quantile_is_min_sample() {
        let n = MIN_SAMPLES;
        let s = LlrSample::draw(&GaussianShiftModel { d: 1.0 }, n, SeedSpec::new(3, 0)).unwrap();
        let t = s.threshold(1.0 - 1.0 / n as f64).unwrap();
        let raw = sample_chunks(SeedSpec::new(3, 0), n, |r| {
            GaussianShiftModel { d: 1.0 }.draw(r).mean()
        });
        let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(t.gamma, min);
        assert!((t.achieved_alpha - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_threshold_matches_quantile() {
        let d = 1.3;
        let alpha = 0.8;
        let t = np_threshold(
            &GaussianShiftModel { d: d },
            alpha,
            200_000,
            SeedSpec::new(5, 0),
        )
        .unwrap();
        let exact = d * d / 2.0 - d * crate::statcore::q_inv(1.0 - alpha).unwrap();
        assert!((t.gamma - exact).abs() < 0.02);
        let c = LlrSample::draw(&ShiftConditional(d), 10, SeedSpec::new(5, 0)).unwrap();
        let tc = c.threshold(alpha).unwrap();
        assert!((tc.gamma - exact).abs() < 1e-9);
        assert!((tc.achieved_alpha - alpha).abs() < 1e-12);
    }

    #[test]
    fn shift_beta_within_three_sigma() {
        for &(d, alpha) in &[(1.0, 0.5), (3.0, 0.99)] {
            let b = beta_mc(
                &GaussianShiftModel { d: d },
                alpha,
                1_000_000,
                SeedSpec::new(11, 2),
            )
            .unwrap();
            let exact = beta_gaussian_shift(d, alpha).unwrap();
            assert!((b.ln() - exact.ln()).abs() <= 3.0 * b.std_err_log, "d={d}");
        }
        let c = LlrSample::draw(&ShiftConditional(2.0), 200, SeedSpec::new(1, 1)).unwrap();
        let b = c.beta(&c.threshold(0.7).unwrap()).unwrap();
        assert!((b.ln() - beta_gaussian_shift(2.0, 0.7).unwrap().ln()).abs() < 1e-9);
    }

    #[test]
    fn change_of_measure_mean_is_one() {
        let s = LlrSample::draw(
            &GaussianShiftModel { d: 1.0 },
            1_000_000,
            SeedSpec::new(2, 0),
        )
        .unwrap();
        let (m, se) = s.log_mean_weight().unwrap();
        assert!(m.abs() < 4.0 * se, "m={m} se={se}");
    }

    #[test]
    fn affine_gamma_tails_are_consistent() {
        let d = LlrDraw::AffineGamma {
            offset: 30.0,
            scale: 0.5,
            shape: 20.0,
        };
        for g in [5.0, 15.0, 22.0, 29.0] {
            assert!((d.upper_tail(g) + d.lower_tail(g) - 1.0).abs() < 1e-13);
        }
        let total = d.log_weighted_upper(f64::NEG_INFINITY);
        assert!((total - d.log_weight()).abs() < 1e-12);
        assert_eq!(d.upper_tail(31.0), 0.0);
    }

    #[test]
    fn too_few_effective_samples_is_reported() {
        let err = beta_mc(
            &GaussianShiftModel { d: 200.0 },
            0.5,
            MIN_SAMPLES,
            SeedSpec::new(1, 0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::CiTooWide { .. }));
        assert!(beta_mc(
            &GaussianShiftModel { d: 1.0 },
            0.5,
            100,
            SeedSpec::new(1, 0)
        )
        .is_err());
        assert!(beta_mc(
            &GaussianShiftModel { d: 1.0 },
            1.0,
            MIN_SAMPLES,
            SeedSpec::new(1, 0)
        )
        .is_err());
    }

    #[test]
    fn weighted_sample_has_no_sampling_error() {
        let draws = vec![LlrDraw::gaussian_shift(1.0), LlrDraw::gaussian_shift(4.0)];
        let s = LlrSample::weighted(draws, vec![1.0, 3.0]).unwrap();
        let t = s.threshold(0.6).unwrap();
        let b = s.beta(&t).unwrap();
        assert_eq!(b.kind, crate::nptest::BetaKind::Exact);
        let direct = 0.25 * LlrDraw::gaussian_shift(1.0).upper_tail(t.gamma)
            + 0.75 * LlrDraw::gaussian_shift(4.0).upper_tail(t.gamma);
        assert!((direct - 0.6).abs() < 1e-10);
    }
}
