//! Complex AWGN channel `Y = x + Z`, `Z ~ CN(0, I)`, with codewords uniform
//! on the sphere `‖x‖² = nP`.

use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::nptest::{beta_gaussian_shift, BetaEstimate, LlrDraw, LlrModel};
use crate::statcore::{
    log_chi2_pdf, log_gamma_p, log_noncentral_chi2_pdf, log_sub_exp, noncentral_chi2_cdf,
    noncentral_chi2_quantile_upper, noncentral_chi2_sf,
    roots::{grid_golden_max, solve_increasing},
    StreamRng,
};
use crate::{Error, Result};

/// Blocklength and SNR of an AWGN instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnSpec {
    pub n: usize,
    pub snr: f64,
}

impl AwgnSpec {
    pub fn new(n: usize, snr: f64) -> Result<Self> {
        if n == 0 || !(snr >= 0.0) || !snr.is_finite() {
            return Err(Error::domain(format!(
                "AWGN needs n >= 1 and P >= 0 (n={n}, P={snr})"
            )));
        }
        Ok(AwgnSpec { n, snr })
    }

    fn dof(&self) -> f64 {
        2.0 * self.n as f64
    }

    fn noncentrality(&self) -> f64 {
        2.0 * self.n as f64 * self.snr
    }
}

/// Reference output law `Q_Y` for the output test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputReference {
    /// `Q_Y = CN(0, I)`.
    UnitNoise,
    /// `Q_Y = CN(0, (1+P) I)`, the capacity-achieving output.
    CapacityAchieving,
}

/// `log₂(1 + P)` bits per channel use.
pub fn awgn_capacity(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

/// `β_α(P_XY, P_X Q_Y)` with `Q_Y = CN(0, I)`: a scalar Gaussian shift
/// with `d = sqrt(2nP)` for any input law on the sphere.
pub fn awgn_joint_beta(spec: &AwgnSpec, alpha: f64) -> Result<BetaEstimate> {
    beta_gaussian_shift(spec.noncentrality().sqrt(), alpha)
}

/// `ln dP_Y/dQ_Y` as a function of `‖y‖²`.
pub fn awgn_output_llr(spec: &AwgnSpec, y_norm_sq: f64, reference: OutputReference) -> Result<f64> {
    if !(y_norm_sq > 0.0) {
        return Err(Error::domain(format!(
            "output norm must be positive, got {y_norm_sq}"
        )));
    }
    let t = 2.0 * y_norm_sq;
    let k = spec.dof();
    let p = log_noncentral_chi2_pdf(k, spec.noncentrality(), t)?;
    let q = match reference {
        OutputReference::UnitNoise => log_chi2_pdf(k, t)?,
        OutputReference::CapacityAchieving => {
            let s = 1.0 + spec.snr;
            log_chi2_pdf(k, t / s)? - s.ln()
        }
    };
    Ok(p - q)
}

/// Exact `β_α(P_Y, Q_Y)` through the sufficient statistic `T = 2‖Y‖²`.
///
/// With unit-noise reference the LLR is increasing in `T` and the test is a
/// `T` threshold. With the capacity-achieving reference the LLR is concave
/// in `T` and the optimal region is an interval.
pub fn awgn_output_beta_exact(
    spec: &AwgnSpec,
    alpha: f64,
    reference: OutputReference,
) -> Result<BetaEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let n = spec.n as f64;
    match reference {
        OutputReference::UnitNoise => {
            let gamma = noncentral_chi2_quantile_upper(spec.dof(), spec.noncentrality(), alpha)?;
            BetaEstimate::exact(crate::statcore::log_gamma_q(n, 0.5 * gamma)?)
        }
        OutputReference::CapacityAchieving => interval_beta(spec, alpha),
    }
}

fn interval_beta(spec: &AwgnSpec, alpha: f64) -> Result<BetaEstimate> {
    let n = spec.n as f64;
    let k = spec.dof();
    let lam = spec.noncentrality();
    let s = 1.0 + spec.snr;
    let llr = |t: f64| awgn_output_llr(spec, 0.5 * t, OutputReference::CapacityAchieving);
    let mean = k + lam;
    let sd = (2.0 * (k + 2.0 * lam)).sqrt();
    let lo = (mean - 40.0 * sd).max(1e-6 * mean).ln();
    let hi = (mean + 40.0 * sd).ln();
    let peak = grid_golden_max(|x| llr(x.exp()), lo, hi, 64, 80)?;
    let t_star = peak.best_x.exp();
    let top = peak.best_value;

    let mut failure: Option<Error> = None;
    let level_roots = |u: f64| -> Result<(f64, f64)> {
        let level = top - u;
        let f = |t: f64| llr(t).map(|v| v - level).unwrap_or(f64::NAN);
        let left = solve_increasing(|x: f64| f(t_star * (-x).exp()) * -1.0, 0.0, 0.5, 1e-13)
            .map(|x| t_star * (-x).exp());
        let right = solve_increasing(|x: f64| -f(t_star * x.exp()), 0.0, 0.5, 1e-13)
            .map(|x| t_star * x.exp());
        Ok((left?, right?))
    };
    let mass = |t1: f64, t2: f64| -> Result<f64> {
        Ok(1.0 - noncentral_chi2_cdf(k, lam, t1)? - noncentral_chi2_sf(k, lam, t2)?)
    };
    // mass of the level set grows with the depth u below the peak
    let mut g = |lu: f64| -> f64 {
        match level_roots(lu.exp()).and_then(|(a, b)| mass(a, b)) {
            Ok(m) => m - alpha,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let lu = solve_increasing(&mut g, 0.0, 1.0, 1e-12);
    if let Some(e) = failure {
        return Err(e);
    }
    let (t1, t2) = level_roots(lu?.exp())?;
    let hi = log_gamma_p(n, 0.5 * t2 / s)?;
    let lo = log_gamma_p(n, 0.5 * t1 / s)?;
    BetaEstimate::exact(log_sub_exp(hi, lo))
}

/// Explicit `n`-letter joint LLR `‖x‖² + 2 Re⟨x, z⟩` against `CN(0, I)`,
/// with `x` uniform on the sphere.
#[derive(Debug, Clone, Copy)]
pub struct AwgnJointModel {
    pub spec: AwgnSpec,
}

impl LlrModel for AwgnJointModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let m = 2 * self.spec.n;
        let x: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = (self.spec.n as f64 * self.spec.snr).sqrt() / norm;
        let mut cross = 0.0;
        for xi in &x {
            let z: f64 = StandardNormal.sample(rng);
            // each real coordinate of CN(0,1) noise has variance 1/2
            cross += scale * xi * z * std::f64::consts::FRAC_1_SQRT_2;
        }
        LlrDraw::Point(self.spec.n as f64 * self.spec.snr + 2.0 * cross)
    }
}

/// Output LLR `ln dP_Y/dQ_Y` sampled under `P_Y` through `T = 2‖Y‖²`.
#[derive(Debug, Clone, Copy)]
pub struct AwgnOutputModel {
    pub spec: AwgnSpec,
    pub reference: OutputReference,
}

impl LlrModel for AwgnOutputModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let k = self.spec.dof();
        let z: f64 = StandardNormal.sample(rng);
        let c = (z + self.spec.noncentrality().sqrt()).powi(2);
        let rest = if k > 1.0 {
            ChiSquared::new(k - 1.0)
                .map(|d| d.sample(rng))
                .unwrap_or(f64::NAN)
        } else {
            0.0
        };
        let t = c + rest;
        LlrDraw::Point(awgn_output_llr(&self.spec, 0.5 * t, self.reference).unwrap_or(f64::NAN))
    }
}
