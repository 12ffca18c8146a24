//! MIMO Rayleigh block fading `Y_k = X_k H_k + Z_k`, `k = 1..ℓ`, with
//! `X_k ∈ C^{n_c×m_t}`, `H_k ∈ C^{m_t×m_r}` constant over a coherence block
//! and known at the receiver, `n = ℓ·n_c` channel uses and the codeword
//! constraint `‖X‖²_F = nP`.
//!
//! The capacity-achieving input has i.i.d. `CN(0, P/m_t)` entries. Given
//! `H`, the rows of the capacity-achieving output are i.i.d.
//! `CN(0, A)` with `A = I + (P/m_t) H†H`, so a block contributes
//! `-‖Z‖² + n_c ln det A + tr(Y A⁻¹ Y†)` to the LLR.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::channels::awgn::OutputReference;
use crate::nptest::{calibrate_proposal, BetaEstimate, BetaEstimator, BetaKind, LlrDraw, LlrModel};
use crate::statcore::{
    gamma_quantile_upper, regularized_gamma_sf, sample_chunks, SeedSpec, StreamRng, LN_2,
};
use crate::{Error, Result};

/// Antenna counts, coherence length, number of blocks and SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimoSpec {
    pub mt: usize,
    pub mr: usize,
    pub nc: usize,
    pub ell: usize,
    pub snr: f64,
}

impl MimoSpec {
    pub fn new(mt: usize, mr: usize, nc: usize, ell: usize, snr: f64) -> Result<Self> {
        if mt == 0 || mr == 0 || nc == 0 || ell == 0 || !(snr >= 0.0) || !snr.is_finite() {
            return Err(Error::domain(format!(
                "MIMO needs positive dimensions and P >= 0 (mt={mt}, mr={mr}, nc={nc}, ell={ell}, P={snr})"
            )));
        }
        Ok(MimoSpec {
            mt,
            mr,
            nc,
            ell,
            snr,
        })
    }

    /// Spec for blocklength `n`, which must be a multiple of `nc`.
    pub fn with_blocklength(mt: usize, mr: usize, nc: usize, n: usize, snr: f64) -> Result<Self> {
        if nc == 0 || n % nc != 0 {
            return Err(Error::domain(format!(
                "blocklength {n} is not a multiple of nc={nc}"
            )));
        }
        Self::new(mt, mr, nc, n / nc, snr)
    }

    pub fn n(&self) -> usize {
        self.nc * self.ell
    }

    /// The capacity-achieving input is unique.
    pub fn has_unique_input(&self) -> bool {
        self.mr >= 2 || (self.mt == 1 && self.mr == 1)
    }

    fn require_unique_input(&self) -> Result<()> {
        if self.has_unique_input() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{}x{} MIMO has no unique capacity-achieving input",
                self.mt, self.mr
            )))
        }
    }
}

fn cn(rng: &mut StreamRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn cn_vec(len: usize, scale: f64, rng: &mut StreamRng) -> Vec<Complex64> {
    (0..len).map(|_| cn(rng) * scale).collect()
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Lower Cholesky factor of a Hermitian positive definite `m×m` matrix
/// together with `ln det`.
#[derive(Debug, Clone)]
struct Cholesky {
    m: usize,
    l: Vec<Complex64>,
    log_det: f64,
}

impl Cholesky {
    fn new(a: &[Complex64], m: usize) -> Cholesky {
        let mut l = vec![Complex64::new(0.0, 0.0); m * m];
        let mut log_det = 0.0;
        for j in 0..m {
            let mut d = a[j * m + j].re;
            for k in 0..j {
                d -= l[j * m + k].norm_sqr();
            }
            let d = d.sqrt();
            log_det += 2.0 * d.ln();
            l[j * m + j] = Complex64::new(d, 0.0);
            for i in j + 1..m {
                let mut s = a[i * m + j];
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k].conj();
                }
                l[i * m + j] = s / d;
            }
        }
        Cholesky { m, l, log_det }
    }

    /// `A⁻¹ = L^{-†} L^{-1}`.
    fn inverse(&self) -> Vec<Complex64> {
        let m = self.m;
        let zero = Complex64::new(0.0, 0.0);
        let mut linv = vec![zero; m * m];
        for c in 0..m {
            for i in c..m {
                let mut s = if i == c {
                    Complex64::new(1.0, 0.0)
                } else {
                    zero
                };
                for k in c..i {
                    s -= self.l[i * m + k] * linv[k * m + c];
                }
                linv[i * m + c] = s / self.l[i * m + i].re;
            }
        }
        let mut inv = vec![zero; m * m];
        for i in 0..m {
            for j in 0..m {
                inv[i * m + j] = (i.max(j)..m)
                    .map(|k| linv[k * m + i].conj() * linv[k * m + j])
                    .sum();
            }
        }
        inv
    }

    /// `y A⁻¹ y†` for a row vector `y`.
    fn quad_form(&self, y: &[Complex64]) -> f64 {
        let m = self.m;
        let mut w = [Complex64::new(0.0, 0.0); 16];
        let mut w_heap;
        let w: &mut [Complex64] = if m <= 16 {
            &mut w[..m]
        } else {
            w_heap = vec![Complex64::new(0.0, 0.0); m];
            &mut w_heap
        };
        let mut total = 0.0;
        for i in 0..m {
            let mut s = y[i].conj();
            for k in 0..i {
                s -= self.l[i * m + k] * w[k];
            }
            w[i] = s / self.l[i * m + i].re;
            total += w[i].norm_sqr();
        }
        total
    }
}

/// Sampling law for the noise and fading, used as an importance-sampling
/// proposal.
///
/// Given `(X, H)` the noise is drawn from the geometric mixture
/// `P^{1-λ} Q^λ` of the two output laws, which is again Gaussian. Every
/// fading entry has variance `block_fade`, and the first row of the first
/// fading matrix is further scaled by `fade_scale`. The draw carries the
/// exact weight `dP/d(proposal)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub lambda: f64,
    pub fade_scale: f64,
    pub block_fade: f64,
}

impl Proposal {
    /// Sampling under `P` itself.
    pub const NONE: Proposal = Proposal {
        lambda: 0.0,
        fade_scale: 1.0,
        block_fade: 1.0,
    };

    /// Noise tilt only.
    pub fn noise(lambda: f64) -> Proposal {
        Proposal {
            lambda,
            ..Proposal::NONE
        }
    }

    fn is_none(&self) -> bool {
        *self == Proposal::NONE
    }
}

/// `ln` of the density ratio `CN(0,1)/CN(0,s)` summed over `h`.
fn fade_log_ratio(h: &[Complex64], s: f64) -> f64 {
    h.len() as f64 * s.ln() - norm_sq(h) * (1.0 - 1.0 / s)
}

/// Per-block quantities of the tilted noise law: `Λ⁻¹`, its Cholesky
/// factor and `ln det Λ`, with `Λ = (1-λ)I + λA⁻¹`.
struct Tilt {
    lambda_inv: Vec<Complex64>,
    factor: Cholesky,
}

/// One coherence block: fading, the output covariance factor and the
/// input-independent part of the LLR.
struct Block {
    h: Vec<Complex64>,
    chol: Option<Cholesky>,
    tilt: Option<Tilt>,
}

impl Block {
    fn draw(mt: usize, mr: usize, cov_scale: Option<f64>, rng: &mut StreamRng) -> Block {
        Self::from_fading(cn_vec(mt * mr, 1.0, rng), mt, mr, cov_scale, 0.0)
    }

    fn from_fading(
        h: Vec<Complex64>,
        mt: usize,
        mr: usize,
        cov_scale: Option<f64>,
        lambda: f64,
    ) -> Block {
        let chol = cov_scale.map(|c| {
            let mut a = vec![Complex64::new(0.0, 0.0); mr * mr];
            for i in 0..mr {
                for j in 0..=i {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..mt {
                        s += h[k * mr + i].conj() * h[k * mr + j];
                    }
                    a[i * mr + j] = s * c;
                    a[j * mr + i] = (s * c).conj();
                }
                a[i * mr + i] += 1.0;
            }
            Cholesky::new(&a, mr)
        });
        let tilt = match &chol {
            Some(c) if lambda > 0.0 => {
                let mut lam = c.inverse();
                lam.iter_mut().for_each(|v| *v *= lambda);
                for i in 0..mr {
                    lam[i * mr + i] += 1.0 - lambda;
                }
                let lambda_inv = Cholesky::new(&lam, mr).inverse();
                let factor = Cholesky::new(&lambda_inv, mr);
                Some(Tilt { lambda_inv, factor })
            }
            _ => None,
        };
        Block { h, chol, tilt }
    }

    /// Draws the output row for mean `w = xH` under the proposal with tilt
    /// `lambda`, writing `y` and `z = y - w`, and returns the row's
    /// `ln E_P[e^{-λL}]`.
    fn tilted_row(
        &self,
        w: &[Complex64],
        lambda: f64,
        y: &mut [Complex64],
        z: &mut [Complex64],
        rng: &mut StreamRng,
    ) -> f64 {
        let mr = w.len();
        match (&self.chol, &self.tilt) {
            (Some(a), Some(t)) => {
                let li = &t.lambda_inv;
                let c = &t.factor.l;
                let g = cn_vec(mr, 1.0, rng);
                let mut wq = 0.0;
                for j in 0..mr {
                    let mut m = Complex64::new(0.0, 0.0);
                    for (k, wk) in w.iter().enumerate() {
                        m += wk * li[k * mr + j];
                    }
                    wq += (w[j].conj() * m).re;
                    let u: Complex64 = (0..=j).map(|k| g[k] * c[j * mr + k].conj()).sum();
                    y[j] = m * (1.0 - lambda) + u;
                    z[j] = y[j] - w[j];
                }
                -lambda * a.log_det + t.factor.log_det - (1.0 - lambda) * norm_sq(w)
                    + (1.0 - lambda).powi(2) * wq
            }
            _ => {
                for j in 0..mr {
                    y[j] = w[j] * (1.0 - lambda) + cn(rng);
                    z[j] = y[j] - w[j];
                }
                -lambda * (1.0 - lambda) * norm_sq(w)
            }
        }
    }

    /// `x H` for a row `x` of length `m_t`.
    fn apply(&self, x: &[Complex64], mr: usize, out: &mut [Complex64]) {
        for (j, o) in out.iter_mut().enumerate().take(mr) {
            *o = x
                .iter()
                .enumerate()
                .map(|(k, xk)| xk * self.h[k * mr + j])
                .sum();
        }
    }

    /// LLR contribution of one output row `y = xH + z`.
    fn row_llr(&self, y: &[Complex64], z: &[Complex64]) -> f64 {
        match &self.chol {
            Some(c) => c.quad_form(y) - norm_sq(z) + c.log_det,
            None => norm_sq(y) - norm_sq(z),
        }
    }
}

fn cov_scale(reference: OutputReference, power_per_antenna: f64) -> Option<f64> {
    match reference {
        OutputReference::CapacityAchieving => Some(power_per_antenna),
        OutputReference::UnitNoise => None,
    }
}

/// LLR of a full codeword `x` (`ℓ·n_c` rows of length `m_t`) through fresh
/// fading and noise.
fn codeword_llr(spec: &MimoSpec, x: &[Complex64], cov: Option<f64>, rng: &mut StreamRng) -> f64 {
    let (mt, mr) = (spec.mt, spec.mr);
    let mut y = vec![Complex64::new(0.0, 0.0); mr];
    let mut total = 0.0;
    for b in 0..spec.ell {
        let block = Block::draw(mt, mr, cov, rng);
        for r in 0..spec.nc {
            let row = &x[(b * spec.nc + r) * mt..(b * spec.nc + r + 1) * mt];
            block.apply(row, mr, &mut y);
            let z = cn_vec(mr, 1.0, rng);
            for (yi, zi) in y.iter_mut().zip(&z) {
                *yi += zi;
            }
            total += block.row_llr(&y, &z);
        }
    }
    total
}

/// As [`codeword_llr`] but sampled from `proposal`, returning a weighted
/// draw.
fn codeword_draw(
    spec: &MimoSpec,
    x: &[Complex64],
    cov: Option<f64>,
    proposal: Proposal,
    rng: &mut StreamRng,
) -> LlrDraw {
    if proposal.is_none() {
        return LlrDraw::Point(codeword_llr(spec, x, cov, rng));
    }
    let (mt, mr) = (spec.mt, spec.mr);
    let lambda = proposal.lambda;
    let zero = Complex64::new(0.0, 0.0);
    let (mut w, mut y, mut z) = (vec![zero; mr], vec![zero; mr], vec![zero; mr]);
    let mut llr = 0.0;
    let mut log_weight = 0.0;
    for b in 0..spec.ell {
        let mut h = cn_vec(mt * mr, proposal.block_fade.sqrt(), rng);
        if proposal.block_fade != 1.0 {
            log_weight += fade_log_ratio(&h, proposal.block_fade);
        }
        if b == 0 && proposal.fade_scale != 1.0 {
            let s = proposal.fade_scale;
            let row = &mut h[..mr];
            row.iter_mut().for_each(|v| *v *= s.sqrt());
            log_weight += fade_log_ratio(row, s * proposal.block_fade)
                - fade_log_ratio(row, proposal.block_fade);
        }
        let block = Block::from_fading(h, mt, mr, cov, lambda);
        for r in 0..spec.nc {
            block.apply(
                &x[(b * spec.nc + r) * mt..(b * spec.nc + r + 1) * mt],
                mr,
                &mut w,
            );
            log_weight += block.tilted_row(&w, lambda, &mut y, &mut z, rng);
            llr += block.row_llr(&y, &z);
        }
    }
    LlrDraw::Weighted {
        value: llr,
        log_weight: log_weight + lambda * llr,
    }
}

/// Joint LLR `ln dP_{XYH}/d(P_X Q_{YH})` with the input uniform on the
/// sphere `‖X‖²_F = nP`.
#[derive(Debug, Clone, Copy)]
pub struct MimoJointModel {
    pub spec: MimoSpec,
    pub reference: OutputReference,
    pub proposal: Proposal,
}

/// Joint model against the capacity-achieving output.
pub fn mimo_joint_llr_model(spec: &MimoSpec) -> Result<MimoJointModel> {
    spec.require_unique_input()?;
    Ok(MimoJointModel {
        spec: *spec,
        reference: OutputReference::CapacityAchieving,
        proposal: Proposal::NONE,
    })
}

impl LlrModel for MimoJointModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let s = &self.spec;
        let mut x = cn_vec(s.n() * s.mt, 1.0, rng);
        let scale = (s.n() as f64 * s.snr / norm_sq(&x)).sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
        codeword_draw(
            s,
            &x,
            cov_scale(self.reference, s.snr / s.mt as f64),
            self.proposal,
            rng,
        )
    }
}

/// Information density of the i.i.d. `CN(0, P'/m_t)` input against its own
/// output law, as used by the cost-constrained DT bound.
#[derive(Debug, Clone, Copy)]
pub struct MimoIidJointModel {
    pub spec: MimoSpec,
    pub input_power: f64,
    pub proposal: Proposal,
}

impl LlrModel for MimoIidJointModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let s = &self.spec;
        let p = self.input_power / s.mt as f64;
        let x = cn_vec(s.n() * s.mt, p.sqrt(), rng);
        codeword_draw(s, &x, Some(p), self.proposal, rng)
    }
}

/// Input power `P'` with `Q_X[‖X‖²_F > nP] = q` for i.i.d. `CN(0, P'/m_t)`
/// entries.
pub fn mimo_cost_dt_power(spec: &MimoSpec, q: f64) -> Result<f64> {
    let k = (spec.n() * spec.mt) as f64;
    let x = gamma_quantile_upper(k, q)?;
    Ok(spec.n() as f64 * spec.snr * spec.mt as f64 / x)
}

/// `Q_X[‖X‖²_F > nP]` for i.i.d. `CN(0, P'/m_t)` entries.
pub fn mimo_cost_violation(spec: &MimoSpec, input_power: f64) -> Result<f64> {
    let k = (spec.n() * spec.mt) as f64;
    regularized_gamma_sf(k, spec.n() as f64 * spec.snr * spec.mt as f64 / input_power)
}

/// Scaled channel against the i.i.d.-input channel. Given `(X̃, H)` the LLR
/// is Gaussian with `|shift|² = (s-1)²‖X̃H‖²_F`, `s = sqrt(nP)/‖X̃‖_F`.
#[derive(Debug, Clone, Copy)]
pub struct MimoScaledModel {
    pub spec: MimoSpec,
}

impl LlrModel for MimoScaledModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let s = &self.spec;
        let (mt, mr) = (s.mt, s.mr);
        let x = cn_vec(s.n() * mt, (s.snr / mt as f64).sqrt(), rng);
        let scale = (s.n() as f64 * s.snr / norm_sq(&x)).sqrt();
        let mut y = vec![Complex64::new(0.0, 0.0); mr];
        let mut energy = 0.0;
        for b in 0..s.ell {
            let block = Block::draw(mt, mr, None, rng);
            for r in 0..s.nc {
                block.apply(&x[(b * s.nc + r) * mt..(b * s.nc + r + 1) * mt], mr, &mut y);
                energy += norm_sq(&y);
            }
        }
        LlrDraw::gaussian_shift(2.0 * (scale - 1.0).powi(2) * energy)
    }
}

/// Lower bound on `β_τ(P_{YH}, Q_{YH})` through the scaled channel
/// (data processing), estimated by Monte Carlo.
pub fn mimo_output_beta_lower(
    spec: &MimoSpec,
    tau: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<BetaEstimate> {
    spec.require_unique_input()?;
    let b = BetaEstimator::new(&MimoScaledModel { spec: *spec }, n_samples, seed)?.beta(tau)?;
    Ok(b.with_kind(BetaKind::LowerBound))
}

/// Conditional LLR for the codeword whose only nonzero entry is
/// `x₁₁ = sqrt(nP)` in the first block.
#[derive(Debug, Clone, Copy)]
pub struct MimoPeakyModel {
    pub spec: MimoSpec,
    pub reference: OutputReference,
    pub proposal: Proposal,
}

impl LlrModel for MimoPeakyModel {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let s = &self.spec;
        let mut x = vec![Complex64::new(0.0, 0.0); s.n() * s.mt];
        x[0] = Complex64::new((s.n() as f64 * s.snr).sqrt(), 0.0);
        codeword_draw(
            s,
            &x,
            cov_scale(self.reference, s.snr / s.mt as f64),
            self.proposal,
            rng,
        )
    }
}

/// `β_α(P_{YH|X=X̂}, Q_{YH})` for the single-entry codeword.
pub fn mimo_peaky_codeword_beta(
    spec: &MimoSpec,
    alpha: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<BetaEstimate> {
    spec.require_unique_input()?;
    let make = |proposal| MimoPeakyModel {
        spec: *spec,
        reference: OutputReference::CapacityAchieving,
        proposal,
    };
    let mut candidates = Vec::new();
    for fade_scale in FADE_SCALES {
        for lambda in TILTS {
            candidates.push(Proposal {
                lambda,
                fade_scale,
                block_fade: 1.0,
            });
        }
    }
    tilted_estimator(make, &candidates, alpha, n_samples, seed)?.beta(alpha)
}

/// Noise tilts tried by the proposal calibration.
const TILTS: [f64; 7] = [0.0, 0.01, 0.02, 0.04, 0.08, 0.15, 0.3];

/// Fading variances tried for the peaky codeword.
const FADE_SCALES: [f64; 5] = [1.0, 0.3, 0.1, 0.04, 0.015];

/// Pilot size of the proposal calibration.
const PILOT: usize = 2_000;

fn tilted_estimator<M: LlrModel, F: Fn(Proposal) -> M>(
    make: F,
    candidates: &[Proposal],
    alpha: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<BetaEstimator> {
    let proposal = calibrate_proposal(&make, candidates, alpha, PILOT, seed.child(2))?;
    BetaEstimator::new(&make(proposal), n_samples, seed)
}

fn noise_tilts() -> Vec<Proposal> {
    TILTS
        .iter()
        .map(|&lambda| Proposal::noise(lambda))
        .collect()
}

/// Fading-variance shrinkage, in units of `1/sqrt(#fading entries)`.
const BLOCK_FADE_STEPS: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0];

/// Calibrates the noise tilt, then the common fading scale together with
/// a halved noise tilt, and samples from the winner.
fn block_tilted_estimator<M: LlrModel, F: Fn(Proposal) -> M>(
    make: F,
    spec: &MimoSpec,
    alpha: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<BetaEstimator> {
    let first = calibrate_proposal(&make, &noise_tilts(), alpha, PILOT, seed.child(2))?;
    let entries = (spec.ell * spec.mt * spec.mr) as f64;
    let mut candidates = Vec::new();
    for lambda in [first.lambda, 0.5 * first.lambda] {
        for c in BLOCK_FADE_STEPS {
            let block_fade = (1.0 - c / entries.sqrt()).max(0.05);
            candidates.push(Proposal {
                lambda,
                fade_scale: 1.0,
                block_fade,
            });
        }
    }
    let proposal = calibrate_proposal(&make, &candidates, alpha, PILOT, seed.child(3))?;
    BetaEstimator::new(&make(proposal), n_samples, seed)
}

/// Estimator for `β(P_{XYH}, P_X Q_{YH})` with the sampling law tuned for
/// levels near `alpha`.
pub fn mimo_joint_estimator(
    spec: &MimoSpec,
    alpha: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<BetaEstimator> {
    spec.require_unique_input()?;
    let make = |proposal| MimoJointModel {
        spec: *spec,
        reference: OutputReference::CapacityAchieving,
        proposal,
    };
    block_tilted_estimator(make, spec, alpha, n_samples, seed)
}

/// Estimator for the i.i.d.-input information density at power
/// `input_power`, tuned for levels near `alpha`.
pub fn mimo_iid_estimator(
    spec: &MimoSpec,
    input_power: f64,
    alpha: f64,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<BetaEstimator> {
    spec.require_unique_input()?;
    let make = |proposal| MimoIidJointModel {
        spec: *spec,
        input_power,
        proposal,
    };
    block_tilted_estimator(make, spec, alpha, n_samples, seed)
}

/// Sample mean and its standard error.
fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// `E[log₂ det(I + (P/m_t) H†H)]` bits per channel use with its standard
/// error.
pub fn mimo_capacity_mc(spec: &MimoSpec, samples: usize, seed: SeedSpec) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::domain("capacity estimate needs at least 2 samples"));
    }
    let c = spec.snr / spec.mt as f64;
    let v = sample_chunks(seed, samples, |rng| {
        Block::draw(spec.mt, spec.mr, Some(c), rng)
            .chol
            .map_or(0.0, |ch| ch.log_det)
            / LN_2
    });
    Ok(mean_se(&v))
}

/// Dispersion `E[Var[i | X]]` in bits² per channel use for the
/// capacity-achieving input, by nested Monte Carlo: `outer` input blocks,
/// `inner` fading/noise draws each.
pub fn mimo_dispersion_mc(
    spec: &MimoSpec,
    outer: usize,
    inner: usize,
    seed: SeedSpec,
) -> Result<(f64, f64)> {
    spec.require_unique_input()?;
    if outer < 2 || inner < 2 {
        return Err(Error::domain(
            "dispersion estimate needs at least 2 outer and 2 inner samples",
        ));
    }
    let p = spec.snr / spec.mt as f64;
    let block = MimoSpec { ell: 1, ..*spec };
    let v = sample_chunks(seed, outer, |rng| {
        let x = cn_vec(spec.nc * spec.mt, p.sqrt(), rng);
        let draws: Vec<f64> = (0..inner)
            .map(|_| codeword_llr(&block, &x, Some(p), rng))
            .collect();
        let m = draws.iter().sum::<f64>() / inner as f64;
        draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (inner - 1) as f64
    });
    let (m, se) = mean_se(&v);
    let to_bits = 1.0 / (LN_2 * LN_2 * spec.nc as f64);
    Ok((m * to_bits, se * to_bits))
}
