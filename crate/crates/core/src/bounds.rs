//! Finite-blocklength bounds on `log₂ M` assembled from β terms, with the
//! free-parameter searches.

use crate::channels::awgn::{awgn_joint_beta, awgn_output_beta_exact, AwgnSpec, OutputReference};
use crate::channels::exp::{
    exp_codeword_beta, exp_converse_beta_exact, exp_joint_llr_model, exp_window_log_mass,
    ExpChannelSpec, ExpInputMode,
};
use crate::channels::mimo::{
    mimo_cost_dt_power, mimo_cost_violation, mimo_iid_estimator, mimo_joint_estimator,
    MimoScaledModel, MimoSpec,
};
use crate::channels::rayleigh::{
    sphere_divergence_bound, FadingSums, RayleighSpec, SumDistribution,
};
use crate::nptest::{
    beta_lower_haroutunian, BetaEstimate, BetaEstimator, BetaKind, LlrDraw, LlrModel, LlrSample,
};
use crate::statcore::roots::{brent, grid_golden_max};
use crate::statcore::{log_sum_exp, sample_chunks, SeedSpec, LN_2};
use crate::{Error, Result};

/// Width, in standard errors, of the interval whose edge is used by
/// conservative evaluations.
pub const CONSERVATIVE_Z: f64 = 3.0;

/// Number of samples per β used when none is given.
pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// A bound on the size of an `(n, M, ε)` code.
#[derive(Debug, Clone, PartialEq)]
pub struct CodePoint {
    pub n: usize,
    pub eps: f64,
    pub log2m: f64,
    pub rate: f64,
    /// Standard error of `log2m` from Monte Carlo terms (zero otherwise).
    pub std_err_bits: f64,
    /// Value of the free parameter (τ or δ) at the optimum.
    pub param: f64,
    /// Every probe of the search as `(parameter, log2m)`.
    pub trace: Vec<(f64, f64)>,
}

impl CodePoint {
    fn new(
        n: usize,
        eps: f64,
        log2m: f64,
        std_err_bits: f64,
        param: f64,
        trace: Vec<(f64, f64)>,
    ) -> Self {
        CodePoint {
            n,
            eps,
            log2m,
            rate: log2m / n as f64,
            std_err_bits,
            param,
            trace,
        }
    }
}

/// How a free parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Search {
    Fixed(f64),
    /// Uniform grid of the given size on the log scale.
    Grid(usize),
    /// Coarse log-scale grid followed by golden-section probes.
    Golden {
        grid: usize,
        probes: usize,
    },
}

impl Default for Search {
    fn default() -> Self {
        Search::Golden {
            grid: 8,
            probes: 32,
        }
    }
}

/// Free-parameter settings shared by the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FreeParams {
    pub search: Search,
    /// Use the `CONSERVATIVE_Z` edge of each Monte Carlo term in the
    /// direction that keeps the bound valid.
    pub conservative: bool,
}

impl FreeParams {
    fn z(&self) -> f64 {
        if self.conservative {
            CONSERVATIVE_Z
        } else {
            0.0
        }
    }
}

/// The two β terms of the β-β achievability bound for one channel, input
/// law and reference output.
pub trait AchievabilityTerms {
    /// `β_τ(P_Y, Q_Y)` or a lower bound on it.
    fn numerator(&self, tau: f64) -> Result<BetaEstimate>;

    /// `β_α(P_XY, P_X Q_Y)`.
    fn denominator(&self, alpha: f64) -> Result<BetaEstimate>;

    /// `sup_x β_α(P_{Y|X=x}, Q_Y)` over the codeword set, when available.
    fn max_codeword_beta(&self, _alpha: f64) -> Result<BetaEstimate> {
        Err(Error::Unsupported(
            "per-codeword β is not available for this channel".into(),
        ))
    }
}

/// The two β terms of the β-β converse.
pub trait ConverseTerms {
    /// Upper bound on `β_{1-δ}(P_Y, Q_Y)` valid for every code.
    fn numerator(&self, delta: f64) -> Result<BetaEstimate>;

    /// Lower bound on `β_α(P_XY, P_X Q_Y)` valid for every code.
    fn denominator(&self, alpha: f64) -> Result<BetaEstimate>;

    /// Whether `δ > 0` is supported.
    fn has_delta(&self) -> bool {
        true
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps must lie in (0,1), got {eps}")));
    }
    Ok(())
}

fn log2_ceil_pow2(x: f64) -> f64 {
    if x < 50.0 {
        (2f64.powf(x) - 1e-9).ceil().max(1.0).log2()
    } else {
        x
    }
}

fn log2_floor_pow2(x: f64) -> f64 {
    if x < 50.0 {
        (2f64.powf(x) + 1e-9).floor().max(1.0).log2()
    } else {
        x
    }
}

fn combined_se_bits(a: &BetaEstimate, b: &BetaEstimate) -> f64 {
    (a.std_err_log.powi(2) + b.std_err_log.powi(2)).sqrt() / LN_2
}

/// Maximises `f` over a parameter `t = lo·(hi/lo)^s` per `search`. Errors at
/// single probes count as `-∞`; if every probe fails the first error is
/// returned.
fn log_search<F>(mut f: F, lo: f64, hi: f64, search: Search) -> Result<(f64, Vec<(f64, f64)>)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut first_err = None;
    let mut eval = |u: f64| -> Result<f64> {
        match f(u.exp()) {
            Ok(v) => Ok(v),
            Err(e) => {
                first_err.get_or_insert(e);
                Ok(f64::NEG_INFINITY)
            }
        }
    };
    let (a, b) = (lo.ln(), hi.ln());
    let probes = match search {
        Search::Fixed(t) => {
            if !(t >= lo && t <= hi) {
                return Err(Error::domain(format!(
                    "free parameter {t} outside [{lo}, {hi}]"
                )));
            }
            vec![(t.ln(), eval(t.ln())?)]
        }
        Search::Grid(k) => grid_golden_max(&mut eval, a, b, k.max(2), 0)?.probes,
        Search::Golden { grid, probes } => {
            grid_golden_max(&mut eval, a, b, grid.max(2), probes)?.probes
        }
    };
    let probes: Vec<(f64, f64)> = probes.into_iter().map(|(u, v)| (u.exp(), v)).collect();
    let best = probes
        .iter()
        .cloned()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, p| {
            if p.1 > acc.1 {
                p
            } else {
                acc
            }
        });
    if best.1 == f64::NEG_INFINITY {
        return Err(
            first_err.unwrap_or_else(|| Error::numerical("every probe of the search failed"))
        );
    }
    Ok((best.0, probes))
}

/// Smallest `τ/ε` probed by the τ searches.
const TAU_FLOOR: f64 = 1e-7;

/// β-β achievability: `M = ⌈2 β_τ(P_Y,Q_Y) / β_{1-ε+τ}(P_XY, P_X Q_Y)⌉`
/// codewords are attainable, maximised over `τ ∈ (0, ε)`.
pub fn bb_achievability(
    terms: &dyn AchievabilityTerms,
    n: usize,
    eps: f64,
    params: FreeParams,
) -> Result<CodePoint> {
    check_eps(eps)?;
    let z = params.z();
    let eval = |tau: f64| -> Result<(f64, f64)> {
        let num = terms.numerator(tau)?;
        let den = terms.denominator(1.0 - eps + tau)?;
        let bits = (num.ln_lower_edge(z) - den.ln_upper_edge(z)) / LN_2;
        Ok((log2_ceil_pow2(1.0 + bits), combined_se_bits(&num, &den)))
    };
    let (tau, trace) = log_search(
        |t| eval(t).map(|v| v.0),
        eps * TAU_FLOOR,
        eps * (1.0 - 1e-6),
        params.search,
    )?;
    let (log2m, se) = eval(tau)?;
    Ok(CodePoint::new(n, eps, log2m, se, tau, trace))
}

/// κβ bound in its relaxed form for channels where
/// `β(P_{Y|X=x}, Q_Y)` is bounded uniformly over the codeword set:
/// `M = β_τ(P_Y,Q_Y) / sup_x β_{1-ε+τ}(P_{Y|X=x}, Q_Y)`.
pub fn kappa_beta_relaxed(
    terms: &dyn AchievabilityTerms,
    n: usize,
    eps: f64,
    params: FreeParams,
) -> Result<CodePoint> {
    check_eps(eps)?;
    let z = params.z();
    let eval = |tau: f64| -> Result<(f64, f64)> {
        let num = terms.numerator(tau)?;
        let den = terms.max_codeword_beta(1.0 - eps + tau)?;
        let bits = (num.ln_lower_edge(z) - den.ln_upper_edge(z)) / LN_2;
        Ok((log2_floor_pow2(bits), combined_se_bits(&num, &den)))
    };
    // surface capability errors before searching
    terms.max_codeword_beta(1.0 - eps / 2.0)?;
    let (tau, trace) = log_search(
        |t| eval(t).map(|v| v.0),
        eps * TAU_FLOOR,
        eps * (1.0 - 1e-6),
        params.search,
    )?;
    let (log2m, se) = eval(tau)?;
    Ok(CodePoint::new(n, eps, log2m, se, tau, trace))
}

/// Change-of-measure bound `M ≥ τ / (β_{1-ε+τ}(P_XY, P_X Q_Y) · sup dP_Y/dQ_Y)`
/// with `ln sup dP_Y/dQ_Y = log_sup_ratio`.
pub fn jazi_log2m(
    terms: &dyn AchievabilityTerms,
    n: usize,
    eps: f64,
    log_sup_ratio: f64,
    params: FreeParams,
) -> Result<CodePoint> {
    check_eps(eps)?;
    if !(log_sup_ratio >= 0.0) || !log_sup_ratio.is_finite() {
        return Err(Error::domain(format!(
            "ln sup dP_Y/dQ_Y must be finite and >= 0, got {log_sup_ratio}"
        )));
    }
    let z = params.z();
    let eval = |tau: f64| -> Result<(f64, f64)> {
        let den = terms.denominator(1.0 - eps + tau)?;
        let bits = (tau.ln() - log_sup_ratio - den.ln_upper_edge(z)) / LN_2;
        Ok((log2_floor_pow2(bits), den.std_err_log / LN_2))
    };
    let (tau, trace) = log_search(
        |t| eval(t).map(|v| v.0),
        eps * TAU_FLOOR,
        eps * (1.0 - 1e-6),
        params.search,
    )?;
    let (log2m, se) = eval(tau)?;
    Ok(CodePoint::new(n, eps, log2m, se, tau, trace))
}

/// Smallest `δ` probed by the converse search (besides `δ = 0`).
const DELTA_FLOOR: f64 = 1e-12;

/// β-β converse: every code satisfies
/// `M <= β_{1-δ}(P_Y, Q_Y) / β_{1-ε-δ}(P_XY, P_X Q_Y)`, minimised over
/// `δ ∈ [0, 1-ε)`.
pub fn bb_converse(
    terms: &dyn ConverseTerms,
    n: usize,
    eps: f64,
    params: FreeParams,
) -> Result<CodePoint> {
    check_eps(eps)?;
    let z = params.z();
    let eval = |delta: f64| -> Result<(f64, f64)> {
        let num = if delta == 0.0 {
            BetaEstimate::exact(0.0)?
        } else {
            terms.numerator(delta)?
        };
        let den = terms.denominator(1.0 - eps - delta)?;
        let bits = (num.ln_upper_edge(z) - den.ln_lower_edge(z)) / LN_2;
        Ok((log2_floor_pow2(bits), combined_se_bits(&num, &den)))
    };
    let at_zero = eval(0.0)?;
    let mut best = (0.0, at_zero.0);
    let mut trace = vec![(0.0, at_zero.0)];
    if terms.has_delta() {
        let search = match params.search {
            Search::Fixed(d) if d == 0.0 => None,
            s => Some(s),
        };
        if let Some(search) = search {
            let hi = (1.0 - eps) * (1.0 - 1e-6);
            if let Ok((_, probes)) = log_search(
                |d| eval(d).map(|v| -v.0),
                DELTA_FLOOR.min(hi / 2.0),
                hi,
                search,
            ) {
                for (d, v) in probes {
                    trace.push((d, -v));
                    if -v < best.1 {
                        best = (d, -v);
                    }
                }
            }
        }
    }
    let (log2m, se) = eval(best.0)?;
    Ok(CodePoint::new(n, eps, log2m, se, best.0, trace))
}

/// Weakened DT bound at `M`: `ε <= P[L < ln(M/2)] + (M/2) E[e^{-L} 1{L >= ln(M/2)}]`
/// for the joint-versus-product LLR sample. Returns `(ε, std err)`.
pub fn dt_eps(sample: &LlrSample, log2m: f64) -> Result<(f64, f64)> {
    let g = (log2m - 1.0) * LN_2;
    let p = sample.strict_lower_tail(g);
    let (lw, se_log) = sample.log_weighted_tail(g)?;
    let tail = (g + lw).exp();
    let n = sample.len() as f64;
    let se_p = if sample.is_weighted() {
        0.0
    } else {
        (p * (1.0 - p).max(0.0) / n).sqrt()
    };
    Ok((p + tail, (se_p.powi(2) + (tail * se_log).powi(2)).sqrt()))
}

/// Cost-constrained DT bound at `M`: the DT terms for the i.i.d. law `Q_X`
/// plus `Q_X[F^c] = e^{log_violation}`.
pub fn cost_dt_eps(sample: &LlrSample, log_violation: f64, log2m: f64) -> Result<(f64, f64)> {
    let (e, se) = dt_eps(sample, log2m)?;
    Ok((e + log_violation.exp(), se))
}

/// Largest `log₂ M` (integer `M`) whose DT-type bound `eps_at` stays at or
/// below `eps`; `eps_at` must be nondecreasing in `log₂ M`.
fn largest_log2m<F: FnMut(f64) -> Result<(f64, f64)>>(
    mut eps_at: F,
    eps: f64,
    z: f64,
    hint: f64,
) -> Result<(f64, f64)> {
    let mut ok = |l: f64| -> Result<bool> {
        let (e, se) = eps_at(l)?;
        Ok(e + z * se <= eps)
    };
    if !ok(0.0)? {
        return Err(Error::numerical(format!(
            "bound exceeds eps={eps} already at M = 1"
        )));
    }
    let mut lo = 0.0;
    let mut hi = hint.max(1.0);
    while ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::numerical("DT bound search diverged"));
        }
    }
    while hi - lo > 1e-6 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let log2m = log2_floor_pow2(lo);
    let (_, se) = eps_at(log2m)?;
    Ok((log2m, se))
}

/// Largest code size certified by the DT bound.
pub fn dt_log2m(sample: &LlrSample, n: usize, eps: f64, params: FreeParams) -> Result<CodePoint> {
    check_eps(eps)?;
    let (l, se) = largest_log2m(|l| dt_eps(sample, l), eps, params.z(), n as f64)?;
    Ok(CodePoint::new(n, eps, l, se, f64::NAN, Vec::new()))
}

/// Largest code size certified by the cost-constrained DT bound.
pub fn cost_dt_log2m(
    sample: &LlrSample,
    log_violation: f64,
    n: usize,
    eps: f64,
    params: FreeParams,
) -> Result<CodePoint> {
    check_eps(eps)?;
    if log_violation.exp() >= eps {
        return Err(Error::domain("Q_X[F^c] must be below eps"));
    }
    let (l, se) = largest_log2m(
        |l| cost_dt_eps(sample, log_violation, l),
        eps,
        params.z(),
        n as f64,
    )?;
    Ok(CodePoint::new(n, eps, l, se, f64::NAN, Vec::new()))
}

/// Feinstein-type bound with a cost constraint:
/// `ε <= P[L <= ln γ + ln η] + M/γ + P_Y[dP_Y/dQ_Y >= η]`, `L` the joint
/// LLR against `P_X Q_Y`. `output_tail(b)` bounds `P_Y[ln dP_Y/dQ_Y >= b]`.
pub fn feinstein_var_eps<T: Fn(f64) -> f64>(
    joint: &LlrSample,
    output_tail: T,
    log2m: f64,
    log_gamma: f64,
    log_eta: f64,
) -> f64 {
    let ln_m = log2m * LN_2;
    joint.lower_tail(log_gamma + log_eta) + (ln_m - log_gamma).exp() + output_tail(log_eta)
}

/// Share of `ε` spent on each of the last two Feinstein terms.
const FEINSTEIN_SHARES: [f64; 8] = [0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.45];

/// Largest `log₂ M` certified by [`feinstein_var_eps`], optimised over a grid
/// of `(γ, η)`. `output_quantile(q)` returns the smallest `b` with
/// `P_Y[ln dP_Y/dQ_Y >= b] <= q` (an upper bound suffices).
pub fn feinstein_log2m<Q>(
    joint: &LlrSample,
    output_quantile: Q,
    n: usize,
    eps: f64,
) -> Result<CodePoint>
where
    Q: Fn(f64) -> Result<f64>,
{
    check_eps(eps)?;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut trace = Vec::new();
    for &fa in &FEINSTEIN_SHARES {
        for &fb in &FEINSTEIN_SHARES {
            let r = eps * (1.0 - fa - fb);
            if r <= 0.0 {
                continue;
            }
            let a = -(eps * fa).ln();
            let b = match output_quantile(eps * fb) {
                Ok(b) => b,
                Err(_) => continue,
            };
            let Ok(q) = joint.lower_quantile(r) else {
                continue;
            };
            let l = log2_floor_pow2((q - a - b) / LN_2);
            trace.push((a + b, l));
            if best.is_none_or(|bst| l > bst.0) {
                best = Some((l, a, b));
            }
        }
    }
    let (log2m, _, _) = best.ok_or_else(|| Error::numerical("no feasible Feinstein parameters"))?;
    Ok(CodePoint::new(n, eps, log2m, 0.0, f64::NAN, trace))
}

/// AWGN terms with `Q_Y = CN(0, I)`; both β are exact.
#[derive(Debug, Clone, Copy)]
pub struct AwgnTerms {
    pub spec: AwgnSpec,
}

impl AchievabilityTerms for AwgnTerms {
    fn numerator(&self, tau: f64) -> Result<BetaEstimate> {
        awgn_output_beta_exact(&self.spec, tau, OutputReference::UnitNoise)
    }

    fn denominator(&self, alpha: f64) -> Result<BetaEstimate> {
        awgn_joint_beta(&self.spec, alpha)
    }

    fn max_codeword_beta(&self, alpha: f64) -> Result<BetaEstimate> {
        awgn_joint_beta(&self.spec, alpha)
    }
}

impl ConverseTerms for AwgnTerms {
    fn numerator(&self, delta: f64) -> Result<BetaEstimate> {
        awgn_output_beta_exact(&self.spec, 1.0 - delta, OutputReference::UnitNoise)
    }

    fn denominator(&self, alpha: f64) -> Result<BetaEstimate> {
        awgn_joint_beta(&self.spec, alpha)
    }
}

/// Quadrature nodes used for the exponential-channel joint law.
pub const EXP_QUADRATURE_NODES: usize = 64;

/// Exponential-noise terms: input i.i.d. capacity-achieving conditioned on
/// the window `nσ - width <= S_X <= nσ`, `Q_Y` the capacity-achieving
/// output, numerator `τ·Q_X[F]`.
#[derive(Debug, Clone)]
pub struct ExpTerms {
    pub spec: ExpChannelSpec,
    pub width: f64,
    log_mass: f64,
    joint: BetaEstimator,
}

impl ExpTerms {
    pub fn new(spec: &ExpChannelSpec, width: f64) -> Result<Self> {
        let model = exp_joint_llr_model(spec, ExpInputMode::FWindow { width })?;
        let joint = BetaEstimator::from_single(model.quadrature_sample(EXP_QUADRATURE_NODES)?);
        Ok(ExpTerms {
            spec: *spec,
            width,
            log_mass: model.log_acceptance(),
            joint,
        })
    }

    /// `ln Q_X[F]`.
    pub fn log_window_mass(&self) -> f64 {
        self.log_mass
    }
}

impl AchievabilityTerms for ExpTerms {
    fn numerator(&self, tau: f64) -> Result<BetaEstimate> {
        BetaEstimate::lower(tau.ln() + self.log_mass)
    }

    fn denominator(&self, alpha: f64) -> Result<BetaEstimate> {
        self.joint.beta(alpha)
    }

    fn max_codeword_beta(&self, alpha: f64) -> Result<BetaEstimate> {
        let lo = (self.spec.n as f64 * self.spec.sigma - self.width).max(0.0);
        exp_codeword_beta(&self.spec, lo, alpha)
    }
}

/// Exponential-noise converse at `δ = 0`, where the bound depends on the
/// code only through `Σ x_i <= nσ`.
#[derive(Debug, Clone, Copy)]
pub struct ExpConverse {
    pub spec: ExpChannelSpec,
}

impl ConverseTerms for ExpConverse {
    fn numerator(&self, _delta: f64) -> Result<BetaEstimate> {
        Err(Error::Unsupported(
            "the exponential-noise converse is evaluated at delta = 0".into(),
        ))
    }

    fn denominator(&self, alpha: f64) -> Result<BetaEstimate> {
        exp_converse_beta_exact(&self.spec, 1.0 - alpha)
    }

    fn has_delta(&self) -> bool {
        false
    }
}

/// Exponential-noise cost-constrained DT bound. `Q_X` is the i.i.d.
/// capacity-achieving input for a reduced budget `σ'` chosen so that
/// `Q_X[Σ x_i > nσ] = ε/2`, and `F = {Σ x_i <= nσ}`.
pub fn exp_cost_dt(spec: &ExpChannelSpec, eps: f64, params: FreeParams) -> Result<CodePoint> {
    check_eps(eps)?;
    let budget = spec.n as f64 * spec.sigma;
    let log_violation = |sigma: f64| -> Result<f64> {
        let reduced = ExpChannelSpec::new(spec.n, sigma)?;
        Ok(crate::statcore::log1mexp(exp_window_log_mass(
            &reduced,
            f64::NEG_INFINITY,
            budget,
        )?))
    };
    let target = (0.5 * eps).ln();
    let sigma = brent(
        |s| {
            log_violation(s)
                .map(|v| v - target)
                .unwrap_or(f64::INFINITY)
        },
        1e-6 * spec.sigma,
        spec.sigma,
        1e-12 * spec.sigma,
        200,
    )?;
    let reduced = ExpChannelSpec::new(spec.n, sigma)?;
    let sample = exp_joint_llr_model(&reduced, ExpInputMode::Iid)?
        .quadrature_sample(4 * EXP_QUADRATURE_NODES)?;
    let mut point = cost_dt_log2m(&sample, log_violation(sigma)?, spec.n, eps, params)?;
    point.param = sigma;
    Ok(point)
}

/// Rayleigh terms: sphere input, `Q_Y = CN(0, I)` with the fading passed
/// through. Numerator via the better of the Haroutunian step and the
/// scaled-channel estimate, then the characteristic-function product
/// stage; denominator by Monte Carlo on cached fading sums.
pub struct RayleighTerms {
    pub spec: RayleighSpec,
    product: SumDistribution,
    joint: BetaEstimator,
    scaled: BetaEstimator,
}

impl RayleighTerms {
    pub fn new(spec: &RayleighSpec, sums: &FadingSums) -> Result<Self> {
        if sums.n() != spec.n {
            return Err(Error::domain(format!(
                "fading sums are for n={}, spec has n={}",
                sums.n(),
                spec.n
            )));
        }
        Ok(RayleighTerms {
            spec: *spec,
            product: SumDistribution::new(spec)?,
            joint: sums.joint_estimator(spec.snr)?,
            scaled: sums.scaled_estimator(spec.snr)?,
        })
    }
}

impl AchievabilityTerms for RayleighTerms {
    fn numerator(&self, tau: f64) -> Result<BetaEstimate> {
        // larger of the Haroutunian level and the scaled-channel estimate
        let haroutunian = beta_lower_haroutunian(sphere_divergence_bound(&self.spec), tau)?.ln();
        let (ln_tau_hat, se) = match self.scaled.beta(tau) {
            Ok(b) if b.ln() > haroutunian => (b.ln(), b.std_err_log),
            _ => (haroutunian, 0.0),
        };
        if !ln_tau_hat.is_finite() {
            return BetaEstimate::lower(f64::NEG_INFINITY);
        }
        let mut out = self
            .product
            .beta(ln_tau_hat.exp())?
            .with_kind(BetaKind::LowerBound);
        out.std_err_log = se;
        Ok(out)
    }

    fn denominator(&self, alpha: f64) -> Result<BetaEstimate> {
        self.joint.beta(alpha)
    }
}

/// MIMO terms: sphere input, capacity-achieving output; numerator through
/// the scaled channel, both by Monte Carlo.
pub struct MimoTerms {
    pub spec: MimoSpec,
    joint: BetaEstimator,
    output: BetaEstimator,
    shifts: Vec<f64>,
}

impl MimoTerms {
    /// Samples both estimators, tuning the joint sampler for levels near
    /// `1 - ε/2`.
    pub fn new(spec: &MimoSpec, eps: f64, n_samples: usize, seed: SeedSpec) -> Result<Self> {
        check_eps(eps)?;
        let joint = mimo_joint_estimator(spec, 1.0 - eps / 2.0, n_samples, seed.child(0))?;
        let model = MimoScaledModel { spec: *spec };
        let out_seed = seed.child(1);
        let draw = |s: SeedSpec| sample_chunks(s, n_samples, |rng| model.draw(rng));
        let integral = draw(out_seed.child(1));
        let shifts = integral
            .iter()
            .map(|d| match *d {
                LlrDraw::Gaussian { var, .. } => var,
                other => other.variance(),
            })
            .collect();
        let output = BetaEstimator::from_samples(
            LlrSample::from_draws(draw(out_seed.child(0)))?,
            LlrSample::from_draws(integral)?,
        );
        Ok(MimoTerms {
            spec: *spec,
            joint,
            output,
            shifts,
        })
    }

    /// Joint LLR sample (integral role).
    pub fn joint_sample(&self) -> &LlrSample {
        self.joint.sample()
    }

    /// Smallest `b` for which the Chernoff bound on
    /// `P_Y[ln dP_Y/dQ_Y >= b]` is at most `q`. The output LLR is a
    /// conditional expectation of the scaled-channel LLR ratio, so
    /// `P_Y[ln dP_Y/dQ_Y >= b] <= E[e^{s(s+1)v/2}] e^{-sb}` for `s > 0`,
    /// `v` the squared shift of the scaled channel.
    pub fn output_tail_quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!(
                "tail level must lie in (0,1), got {q}"
            )));
        }
        let ln_n = (self.shifts.len() as f64).ln();
        let mut best = f64::INFINITY;
        for k in 0..=60 {
            let s = 1e-3 * 10f64.powf(k as f64 / 15.0);
            let terms: Vec<f64> = self
                .shifts
                .iter()
                .map(|v| 0.5 * s * (s + 1.0) * v)
                .collect();
            let cgf = log_sum_exp(&terms)? - ln_n;
            best = best.min((cgf - q.ln()) / s);
        }
        Ok(best)
    }
}

impl AchievabilityTerms for MimoTerms {
    fn numerator(&self, tau: f64) -> Result<BetaEstimate> {
        Ok(self.output.beta(tau)?.with_kind(BetaKind::LowerBound))
    }

    fn denominator(&self, alpha: f64) -> Result<BetaEstimate> {
        self.joint.beta(alpha)
    }
}

/// Feinstein-type bound for MIMO with the sphere input and the
/// capacity-achieving output.
pub fn mimo_feinstein(terms: &MimoTerms, eps: f64) -> Result<CodePoint> {
    feinstein_log2m(
        terms.joint_sample(),
        |q| terms.output_tail_quantile(q),
        terms.spec.n(),
        eps,
    )
}

/// MIMO cost-constrained DT bound: i.i.d. `CN(0, P'/m_t)` input with `P'`
/// set so that `Q_X[‖X‖²_F > nP] = ε/2`.
pub fn mimo_cost_dt(
    spec: &MimoSpec,
    eps: f64,
    n_samples: usize,
    seed: SeedSpec,
    params: FreeParams,
) -> Result<CodePoint> {
    check_eps(eps)?;
    let power = mimo_cost_dt_power(spec, 0.5 * eps)?;
    let est = mimo_iid_estimator(spec, power, 1.0 - eps / 2.0, n_samples, seed)?;
    let log_violation = mimo_cost_violation(spec, power)?.ln();
    let mut point = cost_dt_log2m(est.sample(), log_violation, spec.n(), eps, params)?;
    point.param = power;
    Ok(point)
}

/// Terms with `Q_Y = P_Y`: the numerator is `τ` exactly and the bound is
/// the DT bound in β form.
pub struct DtTerms<'a> {
    pub joint: &'a BetaEstimator,
}

impl AchievabilityTerms for DtTerms<'_> {
    fn numerator(&self, tau: f64) -> Result<BetaEstimate> {
        BetaEstimate::exact(tau.ln())
    }

    fn denominator(&self, alpha: f64) -> Result<BetaEstimate> {
        self.joint.beta(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::exp::exp_converse_rate;
    use crate::statcore::q_func;

    #[test]
    fn dt_eps_matches_gaussian_closed_form() {
        let v = 300.0;
        let sample = LlrSample::from_draws(vec![LlrDraw::gaussian_shift(v)]).unwrap();
        for log2m in [80.0, 100.0, 120.0] {
            let g = (log2m - 1.0) * LN_2;
            let sd = f64::sqrt(v);
            let oracle = q_func((0.5 * v - g) / sd) + (g.exp()) * q_func((g + 0.5 * v) / sd);
            let (e, _) = dt_eps(&sample, log2m).unwrap();
            assert!((e / oracle - 1.0).abs() < 1e-9, "{log2m}: {e} vs {oracle}");
        }
    }

    #[test]
    fn awgn_achievability_regression() {
        // √(2nP) = 10, τ = ε/2; oracle from scipy ncx2/chi2/norm tails
        let spec = AwgnSpec::new(2000, 0.025).unwrap();
        let eps = 1e-3;
        let p = FreeParams {
            search: Search::Fixed(eps / 2.0),
            conservative: false,
        };
        let ach = bb_achievability(&AwgnTerms { spec }, spec.n, eps, p).unwrap();
        let oracle = 2f64.powf(19.908777626921708).ceil().log2();
        assert!((ach.log2m - oracle).abs() < 1e-9, "{}", ach.log2m);
        assert_eq!(ach.std_err_bits, 0.0);
    }

    #[test]
    fn awgn_achievability_below_converse() {
        for (n, snr, eps) in [(500, 0.1, 1e-3), (2000, 0.025, 1e-3), (200, 0.5, 1e-2)] {
            let spec = AwgnSpec::new(n, snr).unwrap();
            let p = FreeParams::default();
            let ach = bb_achievability(&AwgnTerms { spec }, n, eps, p).unwrap();
            let conv = bb_converse(&AwgnTerms { spec }, n, eps, p).unwrap();
            assert!(ach.log2m <= conv.log2m, "{} > {}", ach.log2m, conv.log2m);
            assert!(conv.rate < crate::channels::awgn::awgn_capacity(snr));
            assert!(ach.param > 0.0 && ach.param < eps);
            assert!(conv.param >= 0.0 && conv.param < 1.0 - eps);
        }
    }

    #[test]
    fn search_never_loses_to_a_fixed_parameter() {
        let spec = AwgnSpec::new(200, 0.5).unwrap();
        let eps = 1e-2;
        let terms = AwgnTerms { spec };
        let best = bb_achievability(&terms, spec.n, eps, FreeParams::default()).unwrap();
        for &(tau, _) in &best.trace {
            assert!(tau > 0.0 && tau < eps);
        }
        for tau in [1e-5, 1e-4, 1e-3, 5e-3] {
            let fixed = bb_achievability(
                &terms,
                spec.n,
                eps,
                FreeParams {
                    search: Search::Fixed(tau),
                    conservative: false,
                },
            )
            .unwrap();
            assert!(fixed.log2m <= best.log2m + 1e-9);
        }
        let bad = bb_achievability(
            &terms,
            spec.n,
            eps,
            FreeParams {
                search: Search::Fixed(2.0 * eps),
                conservative: false,
            },
        );
        assert!(matches!(bad, Err(Error::Domain(_))));
        let conv0 = bb_converse(
            &terms,
            spec.n,
            eps,
            FreeParams {
                search: Search::Fixed(0.0),
                conservative: false,
            },
        )
        .unwrap();
        let conv = bb_converse(&terms, spec.n, eps, FreeParams::default()).unwrap();
        assert!(conv.log2m <= conv0.log2m);
        assert_eq!(conv0.param, 0.0);
    }

    #[test]
    fn kappa_beta_drops_the_factor_two() {
        let spec = AwgnSpec::new(1000, 0.2).unwrap();
        let eps = 1e-3;
        let p = FreeParams {
            search: Search::Fixed(4e-4),
            conservative: false,
        };
        let bb = bb_achievability(&AwgnTerms { spec }, spec.n, eps, p).unwrap();
        let kb = kappa_beta_relaxed(&AwgnTerms { spec }, spec.n, eps, p).unwrap();
        assert!(
            (bb.log2m - 1.0 - kb.log2m).abs() < 1e-9,
            "{} {}",
            bb.log2m,
            kb.log2m
        );
    }

    #[test]
    fn dt_form_agrees_with_matched_output_achievability() {
        let spec = ExpChannelSpec::new(300, 1.0).unwrap();
        let eps = 1e-3;
        let sample = exp_joint_llr_model(&spec, ExpInputMode::Iid)
            .unwrap()
            .quadrature_sample(256)
            .unwrap();
        let joint = BetaEstimator::from_single(sample.clone());
        let p = FreeParams::default();
        let bb = bb_achievability(&DtTerms { joint: &joint }, spec.n, eps, p).unwrap();
        let dt = dt_log2m(&sample, spec.n, eps, p).unwrap();
        assert!(
            (bb.log2m - dt.log2m).abs() < 0.5,
            "{} vs {}",
            bb.log2m,
            dt.log2m
        );
        let (e, _) = dt_eps(&sample, bb.log2m).unwrap();
        assert!(e <= eps * (1.0 + 1e-3), "{e}");
        let (e_next, _) = dt_eps(&sample, dt.log2m + 0.01).unwrap();
        assert!(e_next > eps * 0.99);
        let (e2, _) = dt_eps(&sample, 1.0).unwrap();
        let oracle = sample.strict_lower_tail(0.0) + sample.log_weighted_tail(0.0).unwrap().0.exp();
        assert!((e2 - oracle).abs() < 1e-15);
    }

    #[test]
    fn feinstein_with_matched_output_is_below_dt() {
        let spec = ExpChannelSpec::new(300, 1.0).unwrap();
        let sample = exp_joint_llr_model(&spec, ExpInputMode::Iid)
            .unwrap()
            .quadrature_sample(256)
            .unwrap();
        let eps = 1e-2;
        // Q_Y = P_Y: the output LLR is identically zero
        let fe = feinstein_log2m(&sample, |_| Ok(1e-12), spec.n, eps).unwrap();
        let dt = dt_log2m(&sample, spec.n, eps, FreeParams::default()).unwrap();
        assert!(fe.log2m <= dt.log2m + 1.0, "{} vs {}", fe.log2m, dt.log2m);
        assert!(fe.log2m > dt.log2m - 15.0);
        let e = feinstein_var_eps(
            &sample,
            |b| if b > 0.0 { 0.0 } else { 1.0 },
            fe.log2m,
            fe.log2m * LN_2,
            1e-12,
        );
        assert!((e - 1.0 - sample.lower_tail(fe.log2m * LN_2 + 1e-12)).abs() < 1e-12);
    }

    #[test]
    fn exponential_channel_bounds() {
        let spec = ExpChannelSpec::new(500, 1.0).unwrap();
        let eps = 1e-3;
        let p = FreeParams::default();
        let terms = ExpTerms::new(&spec, spec.default_width()).unwrap();
        let ach = bb_achievability(&terms, spec.n, eps, p).unwrap();
        let conv = bb_converse(&ExpConverse { spec }, spec.n, eps, p).unwrap();
        let exact = exp_converse_rate(&spec, eps).unwrap();
        assert!((conv.rate - exact).abs() < 1.0 / spec.n as f64);
        assert!(ach.log2m <= conv.log2m);
        // frozen from an independent run: 0.88216 and 0.91902 bits per use
        assert!((ach.rate - 0.88216).abs() < 2e-3, "{}", ach.rate);
        assert!((conv.rate - 0.91902).abs() < 2e-3, "{}", conv.rate);
        let jazi = jazi_log2m(&terms, spec.n, eps, -terms.log_window_mass(), p).unwrap();
        assert!(jazi.log2m <= ach.log2m && jazi.log2m >= ach.log2m - 2.0);
        let kb = kappa_beta_relaxed(&terms, spec.n, eps, p).unwrap();
        assert!(kb.log2m <= conv.log2m);
        let cdt = exp_cost_dt(&spec, eps, p).unwrap();
        assert!(cdt.log2m <= conv.log2m && cdt.rate > 0.5);
    }

    #[test]
    fn rayleigh_numerator_survives_small_tau() {
        // the Haroutunian level alone is far below what the product stage resolves
        let spec = RayleighSpec::new(4000, 0.1).unwrap();
        let sums = FadingSums::new(spec.n, 10_000, SeedSpec::new(4, 0)).unwrap();
        let terms = RayleighTerms::new(&spec, &sums).unwrap();
        let haroutunian = beta_lower_haroutunian(sphere_divergence_bound(&spec), 5e-4)
            .unwrap()
            .ln();
        assert!(haroutunian < -40.0);
        let num = AchievabilityTerms::numerator(&terms, 5e-4).unwrap();
        assert!(num.ln().is_finite() && num.std_err_log > 0.0);
        let cap = crate::channels::rayleigh::rayleigh_capacity(0.1).unwrap();
        let ach = bb_achievability(&terms, spec.n, 1e-3, FreeParams::default()).unwrap();
        assert!(
            ach.rate > 0.5 * cap && ach.rate < cap,
            "rate={} capacity={cap}",
            ach.rate
        );
    }

    #[test]
    fn conservative_mode_lowers_mc_achievability() {
        let spec = RayleighSpec::new(200, 1.0).unwrap();
        let sums = FadingSums::new(spec.n, 20_000, SeedSpec::new(3, 0)).unwrap();
        let terms = RayleighTerms::new(&spec, &sums).unwrap();
        let eps = 1e-2;
        let plain = bb_achievability(&terms, spec.n, eps, FreeParams::default()).unwrap();
        let cons = bb_achievability(
            &terms,
            spec.n,
            eps,
            FreeParams {
                conservative: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(cons.log2m <= plain.log2m && plain.std_err_bits > 0.0);
        assert!(plain.rate < crate::channels::rayleigh::rayleigh_capacity(1.0).unwrap());
        assert!(matches!(
            kappa_beta_relaxed(&terms, spec.n, eps, FreeParams::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = AwgnSpec::new(10, 1.0).unwrap();
        for eps in [0.0, 1.0, f64::NAN] {
            assert!(bb_achievability(&AwgnTerms { spec }, 10, eps, FreeParams::default()).is_err());
        }
        let sample = LlrSample::from_draws(vec![LlrDraw::gaussian_shift(1.0)]).unwrap();
        assert!(cost_dt_log2m(&sample, (0.5f64).ln(), 10, 0.1, FreeParams::default()).is_err());
    }

    #[test]
    fn mimo_bounds_on_a_small_instance() {
        let spec = MimoSpec::with_blocklength(2, 2, 2, 60, 1.0).unwrap();
        let eps = 0.05;
        let seed = SeedSpec::new(11, 0);
        let terms = MimoTerms::new(&spec, eps, 20_000, seed).unwrap();
        let q1 = terms.output_tail_quantile(1e-2).unwrap();
        let q2 = terms.output_tail_quantile(1e-4).unwrap();
        assert!(q2 > q1 && q1 > 0.0);
        let p = FreeParams::default();
        let bb = bb_achievability(&terms, spec.n(), eps, p).unwrap();
        let fe = mimo_feinstein(&terms, eps).unwrap();
        let cdt = mimo_cost_dt(&spec, eps, 20_000, seed.child(9), p).unwrap();
        let (cap, _) =
            crate::channels::mimo::mimo_capacity_mc(&spec, 20_000, seed.child(8)).unwrap();
        for pt in [&bb, &fe, &cdt] {
            assert!(pt.rate > 0.0 && pt.rate < cap, "{pt:?} vs {cap}");
        }
        assert!(bb.log2m >= fe.log2m - 3.0 * bb.std_err_bits.max(0.5));
        assert!(matches!(
            kappa_beta_relaxed(&terms, spec.n(), eps, p),
            Err(Error::Unsupported(_))
        ));
    }
}
