//! SISO Rayleigh fading `Y_i = H_i x_i + Z_i` with `H_i, Z_i ~ CN(0,1)`
//! i.i.d., perfect CSIR and codewords uniform on `‖x‖² = nP`.
//!
//! Both tests use the unit-noise reference `Q_Y = CN(0, I)` (with `H`
//! passed through). Given `(x, H)` the joint LLR is Gaussian with mean
//! `G = Σ|H_i x_i|²` and variance `2G`. With `w_i = |x̃_i|²`, `g_i = |H_i|²`
//! (all `Exp(1)`), `G = nP·Σ g_i w_i / Σ w_i`, so the draws only need the
//! pair `(S, T) = (Σ w_i, Σ g_i w_i)`, which does not depend on `P`.

use num_complex::Complex64;
use rand_distr::{Distribution, Exp1};

use crate::nptest::{
    beta_lower_haroutunian, beta_lower_mean_var, BetaEstimate, BetaEstimator, BetaKind, LlrDraw,
    LlrModel, LlrSample,
};
use crate::statcore::{
    ln_gamma,
    quad::{integrate_half_line, GaussLegendre},
    roots::solve_increasing,
    sample_chunks, SeedSpec, StreamRng, LN_2,
};
use crate::{Error, Result};

/// Blocklength and SNR of a Rayleigh instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighSpec {
    pub n: usize,
    pub snr: f64,
}

impl RayleighSpec {
    pub fn new(n: usize, snr: f64) -> Result<Self> {
        if n == 0 || !(snr >= 0.0) || !snr.is_finite() {
            return Err(Error::domain(format!(
                "Rayleigh needs n >= 1 and P >= 0 (n={n}, P={snr})"
            )));
        }
        Ok(RayleighSpec { n, snr })
    }
}

/// `E[log₂(1 + |H|²P)]` bits per channel use.
pub fn rayleigh_capacity(snr: f64) -> Result<f64> {
    let v = integrate_half_line(|g| (-g).exp() * (g * snr).ln_1p(), 0.0, 1e-12)?;
    Ok(v / LN_2)
}

/// Mean and variance (nats) of the per-letter LLR
/// `B = |H|²P·E - ln(1 + |H|²P)`, `E ~ Exp(1)`, of `P*_{YH}` against
/// `CN(0,1) × P_H`.
pub fn rayleigh_letter_moments(snr: f64) -> Result<(f64, f64)> {
    let h = |g: f64| g * snr - (g * snr).ln_1p();
    let m1 = integrate_half_line(|g| (-g).exp() * h(g), 0.0, 1e-13)?;
    let m2 = integrate_half_line(|g| (-g).exp() * h(g).powi(2), 0.0, 1e-13)?;
    Ok((m1, 2.0 * snr * snr + (m2 - m1 * m1)))
}

/// `(S, T)` for one codeword/fading draw.
fn draw_sums(n: usize, rng: &mut StreamRng) -> (f64, f64) {
    let mut s = 0.0;
    let mut t = 0.0;
    for _ in 0..n {
        let w: f64 = Exp1.sample(rng);
        let g: f64 = Exp1.sample(rng);
        s += w;
        t += g * w;
    }
    (s, t)
}

/// Joint LLR model, Rao-Blackwellized over the noise.
#[derive(Debug, Clone, Copy)]
pub struct RayleighJointModel {
    pub spec: RayleighSpec,
}

/// The joint LLR model for `spec`.
pub fn rayleigh_joint_llr_model(spec: &RayleighSpec) -> RayleighJointModel {
    RayleighJointModel { spec: *spec }
}

impl LlrModel for RayleighJointModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let (s, t) = draw_sums(self.spec.n, rng);
        LlrDraw::gaussian_shift(2.0 * self.spec.n as f64 * self.spec.snr * t / s)
    }
}

/// Cached `(S, T)` pairs for one blocklength, reusable across SNR values.
#[derive(Debug, Clone)]
pub struct FadingSums {
    n: usize,
    threshold: Vec<(f64, f64)>,
    integral: Vec<(f64, f64)>,
}

impl FadingSums {
    /// `samples` pairs on each of child streams 0 and 1 of `seed`.
    pub fn new(n: usize, samples: usize, seed: SeedSpec) -> Result<Self> {
        if n == 0 || samples == 0 {
            return Err(Error::domain("fading sums need n >= 1 and samples >= 1"));
        }
        Ok(FadingSums {
            n,
            threshold: sample_chunks(seed.child(0), samples, |r| draw_sums(n, r)),
            integral: sample_chunks(seed.child(1), samples, |r| draw_sums(n, r)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> usize {
        self.integral.len()
    }

    fn estimator<F: Fn(f64, f64) -> f64>(&self, v: F) -> Result<BetaEstimator> {
        let mk = |pairs: &[(f64, f64)]| {
            LlrSample::from_draws(
                pairs
                    .iter()
                    .map(|&(s, t)| LlrDraw::gaussian_shift(v(s, t)))
                    .collect(),
            )
        };
        Ok(BetaEstimator::from_samples(
            mk(&self.threshold)?,
            mk(&self.integral)?,
        ))
    }

    /// Denominator estimator for the joint test at SNR `snr`.
    pub fn joint_estimator(&self, snr: f64) -> Result<BetaEstimator> {
        let n = self.n as f64;
        self.estimator(|s, t| 2.0 * n * snr * t / s)
    }

    /// Estimator for the scaled channel against the i.i.d. Gaussian-input
    /// channel: `v = 2(sqrt(n/S) - 1)²·P·T`.
    pub fn scaled_estimator(&self, snr: f64) -> Result<BetaEstimator> {
        let n = self.n as f64;
        self.estimator(|s, t| 2.0 * ((n / s).sqrt() - 1.0).powi(2) * snr * t)
    }
}

/// `D(P_{YH} with sphere input ‖ (P*_{YH})^n)` upper bound
/// `2nP(1 - Γ(n+½)/(sqrt(n)Γ(n)))` in nats; never above `P`.
pub fn sphere_divergence_bound(spec: &RayleighSpec) -> f64 {
    let n = spec.n as f64;
    let ratio = (ln_gamma(n + 0.5) - ln_gamma(n) - 0.5 * n.ln()).exp();
    2.0 * n * spec.snr * (1.0 - ratio)
}

/// How `β_τ(P_YH, (P*_YH)^n)` is lower-bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereStage {
    /// Haroutunian bound with the exact Gaussian-scaling divergence.
    Haroutunian,
    /// The simplified `e^{-2}τ`, valid for `τ >= P`.
    Simplified,
    /// Monte Carlo on the scaled-channel pair (data processing).
    ScaledChannel { samples: usize, seed: SeedSpec },
}

/// How `β_τ̂((P*_YH)^n, CN(0,I) × P_H)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductStage {
    /// Exact distribution of `Σ B_i` by characteristic-function inversion.
    Characteristic,
    /// Mean/variance lower bound with constant `ln(τ̂/2)`.
    MeanVar,
    /// Monte Carlo over the product law.
    Mc { samples: usize, seed: SeedSpec },
}

/// Output-test lower bound with its intermediate level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputLower {
    pub beta: BetaEstimate,
    /// Level `τ̂` handed to the product stage.
    pub tau_hat: f64,
    /// `τ < P`: the simplified stage is then not justified.
    pub tau_below_snr: bool,
}

/// Lower bound on `β_τ(P_YH, Q_Y P_H)` via
/// `β_τ(P_YH, Q) >= β_{β_τ(P_YH, R)}(R, Q)` with `R = (P*_YH)^n`.
pub fn rayleigh_output_beta_lower(
    spec: &RayleighSpec,
    tau: f64,
    sphere: SphereStage,
    product: ProductStage,
) -> Result<OutputLower> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::domain(format!("tau must lie in (0,1), got {tau}")));
    }
    let tau_hat = match sphere {
        SphereStage::Haroutunian => {
            beta_lower_haroutunian(sphere_divergence_bound(spec), tau)?.value()
        }
        SphereStage::Simplified => (-2.0f64).exp() * tau,
        SphereStage::ScaledChannel { samples, seed } => {
            let sums = FadingSums::new(spec.n, samples, seed)?;
            let b = sums.scaled_estimator(spec.snr)?.beta(tau)?;
            b.ln_lower_edge(0.0).exp()
        }
    };
    let beta = product_beta(spec, tau_hat, product)?.with_kind(BetaKind::LowerBound);
    Ok(OutputLower {
        beta,
        tau_hat,
        tau_below_snr: tau < spec.snr,
    })
}

/// `β_a((P*_YH)^n, CN(0,I) × P_H)` by the chosen method.
pub fn product_beta(spec: &RayleighSpec, a: f64, method: ProductStage) -> Result<BetaEstimate> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain(format!("level must lie in (0,1), got {a}")));
    }
    match method {
        ProductStage::Characteristic => SumDistribution::new(spec)?.beta(a),
        ProductStage::MeanVar => {
            let (m, v) = rayleigh_letter_moments(spec.snr)?;
            beta_lower_mean_var(spec.n, m, v, a)
        }
        ProductStage::Mc { samples, seed } => {
            BetaEstimator::new(&ProductLetterModel { spec: *spec }, samples, seed)?.beta(a)
        }
    }
}

/// `Σ B_i` sampled letter by letter.
#[derive(Debug, Clone, Copy)]
pub struct ProductLetterModel {
    pub spec: RayleighSpec,
}

impl LlrModel for ProductLetterModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let p = self.spec.snr;
        let mut s = 0.0;
        for _ in 0..self.spec.n {
            let g: f64 = Exp1.sample(rng);
            let e: f64 = Exp1.sample(rng);
            s += g * p * e - (g * p).ln_1p();
        }
        LlrDraw::Point(s)
    }
}

/// Distribution of `S = Σ B_i` under `(P*_YH)^n` from its characteristic
/// function `φ(t)^n`, `φ(t) = E_g[(1+gP)^{-it} / (1 - itgP)]`.
///
/// With `Φ(t) = (φ(t) e^{-itμ})^n` and `u = x - nμ`:
/// `P[S > x] = ½ + (1/π)∫₀^∞ Im(e^{-itu}Φ(t))/t dt` and
/// `E[e^{-S} 1{S > x}] = e^{-x}(1/π) Re∫₀^∞ e^{-itu}Φ(t)/(1+it) dt`.
#[derive(Debug, Clone)]
pub struct SumDistribution {
    n: f64,
    mu: f64,
    sd: f64,
    /// `(t, weight, Φ(t))` on `[0, t_max]`.
    nodes: Vec<(f64, f64, Complex64)>,
}

impl SumDistribution {
    pub fn new(spec: &RayleighSpec) -> Result<Self> {
        if !(spec.snr > 0.0) {
            return Err(Error::domain(
                "characteristic-function inversion needs P > 0",
            ));
        }
        let p = spec.snr;
        let n = spec.n as f64;
        // nodes for E_g[·] with g ~ Exp(1), composite Gauss-Legendre on [0, 60]
        let rule = GaussLegendre::new(12);
        let mut g_nodes = Vec::new();
        for k in 0..120 {
            let a = 0.5 * k as f64;
            for (g, w) in rule.mapped(a, a + 0.5) {
                g_nodes.push((g * p, w * (-g).exp(), (g * p).ln_1p()));
            }
        }
        let mu: f64 = g_nodes.iter().map(|&(gp, w, l)| w * (gp - l)).sum();
        let (_, var) = rayleigh_letter_moments(p)?;
        let sd = (n * var).sqrt();
        let phi = |t: f64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(gp, w, l) in &g_nodes {
                let num = Complex64::from_polar(1.0, -t * l);
                acc += w * num / Complex64::new(1.0, -t * gp);
            }
            acc * Complex64::from_polar(1.0, -t * mu)
        };
        let big_phi = |t: f64| -> Complex64 {
            let z = phi(t);
            (z.ln() * n).exp()
        };
        let mut t_max = 8.0 / sd;
        let mut iter = 0;
        while big_phi(t_max).norm() > 1e-22 {
            t_max *= 1.5;
            iter += 1;
            if iter > 80 {
                return Err(Error::numerical("characteristic function does not decay"));
            }
        }
        let panels = 256;
        let rule = GaussLegendre::new(16);
        let h = t_max / panels as f64;
        let mut nodes = Vec::with_capacity(panels * 16);
        for k in 0..panels {
            let a = k as f64 * h;
            for (t, w) in rule.mapped(a, a + h) {
                nodes.push((t, w, big_phi(t)));
            }
        }
        Ok(SumDistribution { n, mu, sd, nodes })
    }

    pub fn mean(&self) -> f64 {
        self.n * self.mu
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    /// `P[S > x]`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        let u = x - self.mean();
        let s: f64 = self
            .nodes
            .iter()
            .map(|&(t, w, f)| w * (Complex64::from_polar(1.0, -t * u) * f).im / t)
            .sum();
        0.5 + s / std::f64::consts::PI
    }

    /// `ln E[e^{-S} 1{S > x}]`.
    pub fn log_weighted_tail(&self, x: f64) -> Result<f64> {
        let u = x - self.mean();
        let s: f64 = self
            .nodes
            .iter()
            .map(|&(t, w, f)| {
                w * (Complex64::from_polar(1.0, -t * u) * f / Complex64::new(1.0, t)).re
            })
            .sum();
        let j = s / std::f64::consts::PI;
        if !(j > 0.0) {
            return Err(Error::numerical(
                "characteristic-function tail lost precision",
            ));
        }
        Ok(-x + j.ln())
    }

    /// Threshold `x` with `P[S > x] = a`.
    pub fn threshold(&self, a: f64) -> Result<f64> {
        let u = solve_increasing(
            |u| a - self.upper_tail(self.mean() + u),
            0.0,
            0.5 * self.sd,
            1e-10 * self.sd,
        )?;
        Ok(self.mean() + u)
    }

    /// `β_a((P*_YH)^n, CN(0,I) × P_H)`.
    pub fn beta(&self, a: f64) -> Result<BetaEstimate> {
        let x = self.threshold(a)?;
        BetaEstimate::exact(self.log_weighted_tail(x)?)
    }
}
