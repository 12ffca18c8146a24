//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test -p betabeta --test acceptance` runs criteria 1-8 and 10;
//! append `-- --slow` to include criterion 9.

use std::process::ExitCode;
use std::time::Instant;

use betabeta::asymptotics::{
    awgn_ebn0_approx, ebn0_from_rate_bound, exp_channel_normal_approx, fading_ebn0_approx,
};
use betabeta::bounds::{
    bb_achievability, bb_converse, mimo_cost_dt, mimo_feinstein, AwgnTerms, ExpConverse, ExpTerms,
    FreeParams, MimoTerms, RayleighTerms,
};
use betabeta::channels::awgn::AwgnSpec;
use betabeta::channels::exp::ExpChannelSpec;
use betabeta::channels::mimo::{
    mimo_capacity_mc, mimo_joint_estimator, mimo_peaky_codeword_beta, MimoSpec,
};
use betabeta::channels::rayleigh::{FadingSums, RayleighSpec};
use betabeta::nptest::{
    beta_gaussian_shift, beta_mc, beta_mixture_upper, beta_variational_lower, geodesic_gaussian,
    BetaEstimator, GaussianShiftModel, LlrDraw, LlrModel,
};
use betabeta::statcore::{q_func, SeedSpec, StreamRng, LN_2};
use betabeta::Result;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const EPS: f64 = 1e-3;

/// Outcome of one criterion: pass flag and a one-line summary.
type Outcome = Result<(bool, String)>;

fn gaussian_oracle() -> Outcome {
    let mut rng = SeedSpec::new(101, 0).rng();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let d = 5.0 * rng.random::<f64>();
        let alpha = 0.02 + 0.96 * rng.random::<f64>();
        let exact = beta_gaussian_shift(d, alpha)?;
        let mc = beta_mc(
            &GaussianShiftModel { d },
            alpha,
            1_000_000,
            SeedSpec::new(102, i),
        )?;
        worst = worst.max((mc.ln() - exact.ln()).abs() / mc.std_err_log);
    }
    Ok((
        worst <= 3.0,
        format!("worst |ln β_mc - ln β| = {worst:.2} standard errors over 20 instances"),
    ))
}

fn beta_of_same_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, alpha) in [1e-6, 0.01, 0.3, 0.5, 0.77, 0.999].into_iter().enumerate() {
        let exact = beta_gaussian_shift(0.0, alpha)?.value();
        let mc = beta_mc(
            &GaussianShiftModel { d: 0.0 },
            alpha,
            10_000,
            SeedSpec::new(103, i as u64),
        )?
        .value();
        worst = worst.max((exact - alpha).abs()).max((mc - alpha).abs());
    }
    Ok((
        worst <= 1e-12,
        format!("max |β(P,P) - α| = {worst:.1e} (closed form and Monte Carlo)"),
    ))
}

fn geodesic_chain() -> Outcome {
    let (m, path) = geodesic_gaussian(1.0, 0.5)?;
    let direct = beta_gaussian_shift(1.0, 0.5)?.value();
    let beta_pr = beta_gaussian_shift(1.0 - m, 0.5)?;
    let chain = beta_variational_lower(beta_pr, |x| beta_gaussian_shift(m, x))?.value();
    let target = q_func(1.0);
    let err = (direct - target).abs().max((chain - target).abs());
    Ok((
        err <= 1e-9 && (target - 0.158655).abs() < 5e-7,
        format!(
            "direct {direct:.9}, chain {chain:.9} through λ = {}, Q(1) = {target:.9}",
            path.lambda
        ),
    ))
}

/// NP test between `λN(m1,1) + (1-λ)N(m2,1)` and `N(0,1)` on the partition of
/// the line into cells of width `h`, with exact cell masses.
///
/// Quantizing can only raise β, so this oracle never undercuts the truth.
fn mixture_np_oracle(m1: f64, m2: f64, lambda: f64, alpha: f64) -> f64 {
    let (lo, hi, h) = (-16.0, 16.0, 2e-4);
    let cells = ((hi - lo) / h) as usize;
    let mass = |a: f64, b: f64, m: f64| q_func(a - m) - q_func(b - m);
    let mut pq: Vec<(f64, f64)> = Vec::with_capacity(cells + 2);
    let ends = [f64::NEG_INFINITY, lo, hi, f64::INFINITY];
    for (a, b) in [(ends[0], ends[1]), (ends[2], ends[3])] {
        pq.push((
            lambda * mass(a, b, m1) + (1.0 - lambda) * mass(a, b, m2),
            mass(a, b, 0.0),
        ));
    }
    for k in 0..cells {
        let a = lo + k as f64 * h;
        let b = a + h;
        pq.push((
            lambda * mass(a, b, m1) + (1.0 - lambda) * mass(a, b, m2),
            mass(a, b, 0.0),
        ));
    }
    let mut cells: Vec<(f64, f64, f64)> = pq
        .into_iter()
        .filter(|&(p, q)| p > 0.0 || q > 0.0)
        .map(|(p, q)| (p.ln() - q.ln(), p, q))
        .collect();
    cells.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (mut p_acc, mut q_acc) = (0.0, 0.0);
    for (_, p, q) in cells {
        if p_acc + p >= alpha {
            return q_acc + q * (alpha - p_acc) / p;
        }
        p_acc += p;
        q_acc += q;
    }
    q_acc
}

fn mixture_bound() -> Outcome {
    let mut rng = SeedSpec::new(104, 0).rng();
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let m1 = -3.0 + 6.0 * rng.random::<f64>();
        let m2 = -3.0 + 6.0 * rng.random::<f64>();
        let lambda = 0.05 + 0.9 * rng.random::<f64>();
        let d1 = 0.01 + 0.49 * rng.random::<f64>();
        let d2 = 0.01 + 0.49 * rng.random::<f64>();
        let b1 = beta_gaussian_shift(m1.abs(), 1.0 - d1)?;
        let b2 = beta_gaussian_shift(m2.abs(), 1.0 - d2)?;
        let (alpha, upper) = beta_mixture_upper(b1, b2, lambda, d1, d2)?;
        let oracle = mixture_np_oracle(m1, m2, lambda, alpha);
        worst = worst.min(upper.value() - oracle);
    }
    Ok((
        worst >= -1e-8,
        format!("min(bound - oracle) = {worst:.3e} over 50 mixtures"),
    ))
}

fn exponential_channel() -> Outcome {
    let p = FreeParams::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [500, 1000, 2000] {
        let spec = ExpChannelSpec::new(n, 1.0)?;
        let ach = bb_achievability(&ExpTerms::new(&spec, spec.default_width())?, n, EPS, p)?.rate;
        let conv = bb_converse(&ExpConverse { spec }, n, EPS, p)?.rate;
        let approx = exp_channel_normal_approx(n, EPS, 1.0)?;
        ok &= ach <= conv && (ach - approx).abs() <= 0.05 && (conv - approx).abs() <= 0.05;
        if n == 2000 {
            ok &= conv - ach <= 0.05;
        }
        parts.push(format!(
            "n={n}: ach {ach:.4} conv {conv:.4} approx {approx:.4}"
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn awgn_curves() -> Outcome {
    let (k, p) = (2000.0, FreeParams::default());
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [0.1, 0.2, 0.3] {
        let approx = awgn_ebn0_approx(k, EPS, r)?;
        let start = approx.ebn0 * r;
        let terms = |n: usize, snr: f64| -> Result<AwgnTerms> {
            Ok(AwgnTerms {
                spec: AwgnSpec::new(n, snr)?,
            })
        };
        let ach = ebn0_from_rate_bound(
            |n, s| Ok(bb_achievability(&terms(n, s)?, n, EPS, p)?.rate),
            k,
            EPS,
            r,
            start,
        )?
        .0
        .ebn0_db();
        let conv = ebn0_from_rate_bound(
            |n, s| Ok(bb_converse(&terms(n, s)?, n, EPS, p)?.rate),
            k,
            EPS,
            r,
            start,
        )?
        .0
        .ebn0_db();
        let a = approx.ebn0_db();
        ok &= conv <= ach && a >= conv - 0.15 && a <= ach + 0.15;
        if r == 0.2 {
            ok &= (a - -0.8485).abs() <= 2e-4;
        }
        parts.push(format!(
            "R={r}: conv {conv:.4} approx {a:.4} ach {ach:.4} dB"
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn rayleigh_curves() -> Outcome {
    let (k, p) = (2000.0, FreeParams::default());
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, r) in [0.1f64, 0.2, 0.3].into_iter().enumerate() {
        let approx = fading_ebn0_approx(k, EPS, r)?;
        let n = (k / r).ceil() as usize;
        let sums = FadingSums::new(n, 100_000, SeedSpec::new(105, i as u64))?;
        let rate_at = |n: usize, snr: f64| -> Result<f64> {
            Ok(bb_achievability(
                &RayleighTerms::new(&RayleighSpec::new(n, snr)?, &sums)?,
                n,
                EPS,
                p,
            )?
            .rate)
        };
        let ach = ebn0_from_rate_bound(rate_at, k, EPS, r, approx.ebn0 * r)?
            .0
            .ebn0_db();
        let a = approx.ebn0_db();
        ok &= ach >= a;
        if r == 0.2 {
            ok &= (a - -0.6019).abs() <= 2e-4;
        }
        parts.push(format!("R={r}: approx {a:.4} ach {ach:.4} dB"));
    }
    Ok((ok, parts.join("; ")))
}

fn mimo_curves() -> Outcome {
    let p = FreeParams::default();
    let samples = 100_000;
    let (cap, cap_se) = mimo_capacity_mc(
        &MimoSpec::new(4, 4, 4, 1, 1.0)?,
        samples,
        SeedSpec::new(106, 0),
    )?;
    let mut ok = (cap - 3.3546).abs() <= 0.02;
    let mut parts = vec![format!("capacity {cap:.4} ± {cap_se:.4}")];
    for n in [400, 800] {
        let spec = MimoSpec::with_blocklength(4, 4, 4, n, 1.0)?;
        let seed = SeedSpec::new(107, n as u64);
        let terms = MimoTerms::new(&spec, EPS, samples, seed.child(0))?;
        let bb = bb_achievability(&terms, n, EPS, p)?;
        let fe = mimo_feinstein(&terms, EPS)?;
        let cdt = mimo_cost_dt(&spec, EPS, samples, seed.child(1), p)?;
        let se = |a: f64, b: f64| 3.0 * (a.powi(2) + b.powi(2)).sqrt() / n as f64;
        let (bb_se, fe_se, cdt_se) = (bb.std_err_bits, fe.std_err_bits.max(0.0), cdt.std_err_bits);
        ok &= bb.rate >= fe.rate - se(bb_se, fe_se) && fe.rate >= cdt.rate - se(fe_se, cdt_se);
        parts.push(format!(
            "n={n}: bb {:.4} feinstein {:.4} cost_dt {:.4}",
            bb.rate, fe.rate, cdt.rate
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn peaky_codeword() -> Outcome {
    let samples = 100_000;
    let tau = 5e-4;
    let alpha = 1.0 - EPS + tau;
    let spec = MimoSpec::with_blocklength(4, 4, 4, 400, 1.0)?;
    let seed = SeedSpec::new(108, 0);
    let peaky = mimo_peaky_codeword_beta(&spec, alpha, samples, seed.child(0))?;
    let joint = mimo_joint_estimator(&spec, alpha, samples, seed.child(1))?.beta(alpha)?;
    let diff = -peaky.log2() + joint.log2();
    let se = (peaky.std_err_log.powi(2) + joint.std_err_log.powi(2)).sqrt() / LN_2;
    Ok((
        (diff - 735.0).abs() <= 20.0,
        format!(
            "-log2 β peaky {:.1}, joint {:.1}, difference {diff:.1} ± {se:.1} bits",
            -peaky.log2(),
            -joint.log2()
        ),
    ))
}

/// Sum of `n` i.i.d. letter LLRs of `N(d,1)` against `N(0,1)`.
struct ShiftProduct {
    d: f64,
    n: usize,
}

impl LlrModel for ShiftProduct {
    fn draw(&self, rng: &mut StreamRng) -> LlrDraw {
        let mut s = 0.0;
        for _ in 0..self.n {
            let z: f64 = StandardNormal.sample(rng);
            s += self.d * self.d / 2.0 + self.d * z;
        }
        LlrDraw::Point(s)
    }
}

fn stein_rate() -> Outcome {
    let (d, n) = (1.0, 2000);
    let div = d * d / 2.0;
    let est = BetaEstimator::new(&ShiftProduct { d, n }, 100_000, SeedSpec::new(109, 0))?;
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.2, 0.8] {
        let mc = -est.beta(alpha)?.ln() / n as f64;
        let exact = -beta_gaussian_shift(d * (n as f64).sqrt(), alpha)?.ln() / n as f64;
        ok &= (mc / div - 1.0).abs() <= 0.1 && (exact / div - 1.0).abs() <= 0.1;
        parts.push(format!(
            "α={alpha}: -(1/n) ln β = {mc:.4} (closed form {exact:.4})"
        ));
    }
    Ok((ok, format!("D = {div}; {}", parts.join("; "))))
}

fn main() -> ExitCode {
    let slow = std::env::args().any(|a| a == "--slow");
    let criteria: [(u32, &str, fn() -> Outcome, bool); 10] = [
        (
            1,
            "Gaussian β Monte Carlo matches the closed form",
            gaussian_oracle,
            false,
        ),
        (2, "β(P,P) = α", beta_of_same_law, false),
        (
            3,
            "variational chain on the Gaussian geodesic is tight",
            geodesic_chain,
            false,
        ),
        (
            4,
            "mixture bound dominates the NP oracle",
            mixture_bound,
            false,
        ),
        (
            5,
            "exponential channel bounds bracket the normal approximation",
            exponential_channel,
            false,
        ),
        (
            6,
            "AWGN Eb/N0 converse <= approximation <= achievability",
            awgn_curves,
            false,
        ),
        (
            7,
            "Rayleigh Eb/N0 achievability above the approximation",
            rayleigh_curves,
            false,
        ),
        (
            8,
            "MIMO capacity and bb >= feinstein >= cost_dt",
            mimo_curves,
            false,
        ),
        (
            9,
            "peaky codeword 735 bits above the joint test",
            peaky_codeword,
            true,
        ),
        (10, "Stein exponent at n = 2000", stein_rate, false),
    ];
    let mut failed = 0;
    for (id, name, run, is_slow) in criteria {
        if is_slow && !slow {
            println!("criterion {id}: SKIP - {name} (slow; run with `cargo test -p betabeta --test acceptance -- --slow`)");
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = match run() {
            Ok(out) => out,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {id}: {verdict} - {name}: {detail} [{:.1}s]",
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
