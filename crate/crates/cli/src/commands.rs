use std::fmt;

use betabeta::asymptotics::{
    awgn_ebn0_approx, ebn0_from_rate_bound, exp_channel_normal_approx, fading_ebn0_approx, from_db,
    mimo_rate_normal, to_db, wideband_line, WidebandParams,
};
use betabeta::bounds::{
    bb_achievability, bb_converse, exp_cost_dt, jazi_log2m, kappa_beta_relaxed, mimo_cost_dt,
    mimo_feinstein, AwgnTerms, CodePoint, ExpConverse, ExpTerms, FreeParams, MimoTerms,
    RayleighTerms, Search, CONSERVATIVE_Z,
};
use betabeta::channels::awgn::AwgnSpec;
use betabeta::channels::exp::ExpChannelSpec;
use betabeta::channels::mimo::{
    mimo_capacity_mc, mimo_dispersion_mc, mimo_joint_estimator, mimo_peaky_codeword_beta, MimoSpec,
};
use betabeta::channels::rayleigh::{rayleigh_capacity, FadingSums, RayleighSpec};
use betabeta::nptest::{beta_gaussian_shift, beta_mc, GaussianShiftModel, MIN_SAMPLES};
use betabeta::statcore::{roots::brent, SeedSpec, LN_2};
use rayon::prelude::*;

use crate::output::{sig9, trace_line, Cell, Table};
use crate::{Common, EbN0Args, ExpArgs, Mimo735Args, MimoArgs, MimoDims, NpArgs};

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Arg(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Arg(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Arg(m) => write!(f, "invalid argument: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl From<betabeta::Error> for CliError {
    fn from(e: betabeta::Error) -> Self {
        match e {
            betabeta::Error::Domain(_) | betabeta::Error::Unsupported(_) => {
                CliError::Arg(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

type Res<T> = Result<T, CliError>;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const MC_DEFAULT: usize = 1_000_000;
const FADING_DEFAULT: usize = 100_000;
const MIMO_DEFAULT: usize = 100_000;

/// Parses `min:max:steps` into `steps` evenly spaced values.
pub fn parse_grid(spec: &str) -> Res<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Arg(format!("grid must be min:max:steps, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || hi < lo || steps == 0 {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn parse_bounds(list: &str, allowed: &[&str]) -> Res<Vec<String>> {
    let out: Vec<String> = list
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if out.is_empty() {
        return Err(CliError::Arg("empty bound list".into()));
    }
    for b in &out {
        if !allowed.contains(&b.as_str()) {
            return Err(CliError::Arg(format!(
                "unknown bound '{b}' (expected one of {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(out)
}

fn check_common(c: &Common) -> Res<()> {
    if !(c.eps > 0.0 && c.eps < 1.0) {
        return Err(CliError::Arg(format!(
            "eps must lie in (0,1), got {}",
            c.eps
        )));
    }
    if let Some(n) = c.samples {
        if n < MIN_SAMPLES {
            return Err(CliError::Arg(format!(
                "samples must be at least {MIN_SAMPLES}, got {n}"
            )));
        }
    }
    Ok(())
}

fn params(c: &Common) -> FreeParams {
    FreeParams {
        search: Search::default(),
        conservative: c.conservative,
    }
}

fn base_meta(t: &mut Table, command: &str, c: &Common, samples: Option<usize>) {
    t.meta(format!("betabeta {VERSION}"));
    t.meta(format!("command: {command}"));
    t.meta(format!("seed: {}", c.seed));
    t.meta(format!("eps: {}", sig9(c.eps)));
    match samples {
        Some(n) => t.meta(format!("samples per beta: {n}")),
        None => t.meta("samples per beta: none (exact or quadrature terms)"),
    }
    match Search::default() {
        Search::Golden { grid, probes } => t.meta(format!(
            "free-parameter search: log-scale grid of {grid} then {probes} golden-section probes"
        )),
        other => t.meta(format!("free-parameter search: {other:?}")),
    }
    if c.conservative {
        t.meta(format!(
            "conservative: Monte Carlo terms at their {CONSERVATIVE_Z}-sigma edge"
        ));
    }
}

struct PointOut {
    rows: Vec<Vec<Cell>>,
    meta: Vec<String>,
}

fn trace_meta(label: &str, at: &str, cp: &CodePoint) -> String {
    format!(
        "trace {label} {at}: param={} log2M={} probes={}",
        sig9(cp.param),
        sig9(cp.log2m),
        trace_line(&cp.trace)
    )
}

/// Solves for the smallest Eb/N0 at which `eval` reaches `rate`, then
/// re-evaluates the bound there.
fn solve_ebn0<F>(mut eval: F, k: f64, eps: f64, rate: f64, start: f64) -> Res<(f64, CodePoint)>
where
    F: FnMut(usize, f64) -> betabeta::Result<CodePoint>,
{
    let (pt, _) = ebn0_from_rate_bound(|n, p| eval(n, p).map(|c| c.rate), k, eps, rate, start)?;
    let n = (k / rate).ceil() as usize;
    let cp = eval(n, pt.ebn0 * rate)?;
    Ok((pt.ebn0_db(), cp))
}

fn check_rates(grid: &[f64]) -> Res<()> {
    if grid.iter().any(|r| !(*r > 0.0)) {
        return Err(CliError::Arg("rates must be positive".into()));
    }
    Ok(())
}

fn collect(points: Vec<Res<PointOut>>, table: &mut Table) -> Res<()> {
    let mut rows = Vec::new();
    for p in points {
        let p = p?;
        for m in p.meta {
            table.meta(m);
        }
        rows.extend(p.rows);
    }
    for r in rows {
        table.row(r);
    }
    Ok(())
}

fn ebn0_row(bound: &str, rate: f64, db: f64, se: f64, seed: u64) -> Vec<Cell> {
    vec![bound.into(), rate.into(), db.into(), se.into(), seed.into()]
}

pub fn awgn_ebn0(a: &EbN0Args) -> Res<Table> {
    ebn0_curves(a, false)
}

pub fn fading_ebn0(a: &EbN0Args) -> Res<Table> {
    ebn0_curves(a, true)
}

fn ebn0_curves(a: &EbN0Args, fading: bool) -> Res<Table> {
    check_common(&a.common)?;
    if !(a.k >= 1.0) || !a.k.is_finite() {
        return Err(CliError::Arg(format!("k must be >= 1, got {}", a.k)));
    }
    let allowed: &[&str] = if fading {
        &["ach", "approx", "wideband", "capacity"]
    } else {
        &["ach", "conv", "approx", "wideband", "capacity"]
    };
    let default = allowed.join(",");
    let bounds = parse_bounds(a.bounds.as_deref().unwrap_or(&default), allowed)?;
    let grid = parse_grid(&a.grid)?;
    check_rates(&grid)?;
    let c = &a.common;
    let samples = if fading {
        Some(c.samples.unwrap_or(FADING_DEFAULT))
    } else {
        None
    };
    let name = if fading { "fading-ebn0" } else { "awgn-ebn0" };
    let mut table = Table::new(&["bound", "rate", "ebn0_db", "std_err", "seed"]);
    base_meta(&mut table, name, c, samples);
    table.meta(format!("k: {}", sig9(a.k)));
    table.meta("std_err: standard error of the bound's rate at the solution, bits per channel use");
    table.meta("approx and wideband rows are approximations, not bounds");
    let p = params(c);
    let (k, eps) = (a.k, c.eps);
    let jobs: Vec<(usize, &String, usize, f64)> = bounds
        .iter()
        .enumerate()
        .flat_map(|(bi, b)| grid.iter().enumerate().map(move |(ri, &r)| (bi, b, ri, r)))
        .collect();
    let points: Vec<Res<PointOut>> = jobs
        .par_iter()
        .map(|&(_, b, ri, r)| -> Res<PointOut> {
            let seed = SeedSpec::new(c.seed, ri as u64);
            let approx = if fading {
                fading_ebn0_approx(k, eps, r)?
            } else {
                awgn_ebn0_approx(k, eps, r)?
            };
            let mut meta = Vec::new();
            let (db, se) = match b.as_str() {
                "approx" => (approx.ebn0_db(), 0.0),
                "wideband" => {
                    let w = if fading {
                        WidebandParams::rayleigh()
                    } else {
                        WidebandParams::awgn()
                    };
                    (wideband_line(r, w)?, 0.0)
                }
                "capacity" => (to_db(capacity_snr(r, fading)? / r), 0.0),
                "ach" | "conv" => {
                    let start = approx.ebn0 * r;
                    let (db, cp) = if fading {
                        let n = (k / r).ceil() as usize;
                        let sums = FadingSums::new(n, samples.unwrap_or(FADING_DEFAULT), seed)?;
                        let eval = |n: usize, snr: f64| {
                            let terms = RayleighTerms::new(&RayleighSpec::new(n, snr)?, &sums)?;
                            bb_achievability(&terms, n, eps, p)
                        };
                        solve_ebn0(eval, k, eps, r, start)?
                    } else if b == "ach" {
                        let eval = |n: usize, snr: f64| {
                            let spec = AwgnSpec::new(n, snr)?;
                            bb_achievability(&AwgnTerms { spec }, n, eps, p)
                        };
                        solve_ebn0(eval, k, eps, r, start)?
                    } else {
                        let eval = |n: usize, snr: f64| {
                            let spec = AwgnSpec::new(n, snr)?;
                            bb_converse(&AwgnTerms { spec }, n, eps, p)
                        };
                        solve_ebn0(eval, k, eps, r, start)?
                    };
                    meta.push(trace_meta(b, &format!("R={}", sig9(r)), &cp));
                    (db, cp.std_err_bits / cp.n as f64)
                }
                _ => unreachable!("bound list is validated"),
            };
            Ok(PointOut {
                rows: vec![ebn0_row(b, r, db, se, seed.stream_index)],
                meta,
            })
        })
        .collect();
    collect(points, &mut table)?;
    Ok(table)
}

/// SNR at which capacity equals `rate` bits per channel use.
fn capacity_snr(rate: f64, fading: bool) -> Res<f64> {
    if !fading {
        return Ok(2f64.powf(rate) - 1.0);
    }
    let f = |p: f64| rayleigh_capacity(p).map(|c| c - rate).unwrap_or(f64::NAN);
    Ok(brent(f, 1e-12, 1e4, 1e-14, 200)?)
}

pub fn exp_channel(a: &ExpArgs) -> Res<Table> {
    check_common(&a.common)?;
    if !(a.sigma > 0.0) || !a.sigma.is_finite() {
        return Err(CliError::Arg(format!(
            "sigma must be positive, got {}",
            a.sigma
        )));
    }
    let bounds = parse_bounds(
        &a.bounds,
        &["ach", "conv", "approx", "jazi", "kappa_beta", "cost_dt"],
    )?;
    let ns = blocklengths(&parse_grid(&a.grid)?, 1)?;
    let c = &a.common;
    let mut header = vec!["n".to_string()];
    header.extend(bounds.iter().map(|b| format!("rate_{b}")));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&header_refs);
    base_meta(&mut table, "exp-channel", c, None);
    table.meta(format!("sigma: {}", sig9(a.sigma)));
    table.meta("input window: sigma*n - ln(n) <= sum(x) <= sigma*n");
    table.meta("rates in bits per channel use; approx is a normal approximation, not a bound");
    let p = params(c);
    let eps = c.eps;
    let points: Vec<Res<PointOut>> = ns
        .par_iter()
        .map(|&n| -> Res<PointOut> {
            let spec = ExpChannelSpec::new(n, a.sigma)?;
            let needs_terms = bounds
                .iter()
                .any(|b| matches!(b.as_str(), "ach" | "jazi" | "kappa_beta"));
            let terms = if needs_terms {
                Some(ExpTerms::new(&spec, spec.default_width())?)
            } else {
                None
            };
            let mut row: Vec<Cell> = vec![n.into()];
            let mut meta = Vec::new();
            for b in &bounds {
                let cp = match b.as_str() {
                    "approx" => {
                        row.push(exp_channel_normal_approx(n, eps, a.sigma)?.into());
                        continue;
                    }
                    "ach" => bb_achievability(terms.as_ref().expect("terms built"), n, eps, p)?,
                    "conv" => bb_converse(&ExpConverse { spec }, n, eps, p)?,
                    "jazi" => {
                        let t = terms.as_ref().expect("terms built");
                        jazi_log2m(t, n, eps, -t.log_window_mass(), p)?
                    }
                    "kappa_beta" => {
                        kappa_beta_relaxed(terms.as_ref().expect("terms built"), n, eps, p)?
                    }
                    "cost_dt" => exp_cost_dt(&spec, eps, p)?,
                    _ => unreachable!("bound list is validated"),
                };
                if !cp.trace.is_empty() {
                    meta.push(trace_meta(b, &format!("n={n}"), &cp));
                }
                row.push(cp.rate.into());
            }
            Ok(PointOut {
                rows: vec![row],
                meta,
            })
        })
        .collect();
    collect(points, &mut table)?;
    Ok(table)
}

/// Rounds grid values up to positive multiples of `step`, dropping repeats.
fn blocklengths(grid: &[f64], step: usize) -> Res<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    for &x in grid {
        if !(x >= 1.0) {
            return Err(CliError::Arg(format!("blocklengths must be >= 1, got {x}")));
        }
        let n = ((x / step as f64).ceil() as usize).max(1) * step;
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    Ok(out)
}

fn mimo_base(d: &MimoDims) -> Res<f64> {
    if !d.snr_db.is_finite() {
        return Err(CliError::Arg("snr-db must be finite".into()));
    }
    let snr = from_db(d.snr_db);
    MimoSpec::new(d.mt, d.mr, d.nc, 1, snr)?;
    Ok(snr)
}

fn mimo_meta(t: &mut Table, d: &MimoDims) {
    t.meta(format!(
        "mt: {} mr: {} nc: {} snr_db: {}",
        d.mt,
        d.mr,
        d.nc,
        sig9(d.snr_db)
    ));
    t.meta("scaling: input entries CN(0, P/m_t); capacity-achieving output covariance I + (P/m_t) H^H H");
}

pub fn mimo(a: &MimoArgs) -> Res<Table> {
    check_common(&a.common)?;
    let snr = mimo_base(&a.dims)?;
    let bounds = parse_bounds(
        &a.bounds,
        &["bb", "feinstein", "cost_dt", "approx", "capacity"],
    )?;
    let d = &a.dims;
    let ns = blocklengths(&parse_grid(&a.grid)?, d.nc)?;
    let c = &a.common;
    let samples = c.samples.unwrap_or(MIMO_DEFAULT);
    let mut table = Table::new(&["n", "bound", "rate", "std_err"]);
    base_meta(&mut table, "mimo", c, Some(samples));
    mimo_meta(&mut table, d);
    let root = SeedSpec::new(c.seed, u64::MAX);
    let unit = MimoSpec::new(d.mt, d.mr, d.nc, 1, snr)?;
    let needs_cap = bounds.iter().any(|b| b == "capacity" || b == "approx");
    let (cap, cap_se) = if needs_cap {
        mimo_capacity_mc(&unit, samples, root.child(0))?
    } else {
        (f64::NAN, 0.0)
    };
    let (disp, disp_se) = if bounds.iter().any(|b| b == "approx") {
        mimo_dispersion_mc(&unit, (samples / 50).max(100), 50, root.child(1))?
    } else {
        (f64::NAN, 0.0)
    };
    if needs_cap {
        table.meta(format!(
            "capacity: {} +- {} bits per channel use",
            sig9(cap),
            sig9(cap_se)
        ));
    }
    if disp.is_finite() {
        table.meta(format!(
            "dispersion: {} +- {} bits^2 per channel use",
            sig9(disp),
            sig9(disp_se)
        ));
    }
    table.meta("approx is a normal approximation, not a bound");
    let p = params(c);
    let eps = c.eps;
    let points: Vec<Res<PointOut>> = ns
        .par_iter()
        .enumerate()
        .map(|(i, &n)| -> Res<PointOut> {
            let spec = MimoSpec::with_blocklength(d.mt, d.mr, d.nc, n, snr)?;
            let seed = SeedSpec::new(c.seed, i as u64);
            let needs_terms = bounds.iter().any(|b| b == "bb" || b == "feinstein");
            let terms = if needs_terms {
                Some(MimoTerms::new(&spec, eps, samples, seed.child(0))?)
            } else {
                None
            };
            let mut rows = Vec::new();
            let mut meta = Vec::new();
            for b in &bounds {
                let (rate, se) = match b.as_str() {
                    "capacity" => (cap, cap_se),
                    "approx" => (mimo_rate_normal(cap, disp, n, eps)?, 0.0),
                    "bb" | "feinstein" | "cost_dt" => {
                        let cp = match b.as_str() {
                            "bb" => {
                                bb_achievability(terms.as_ref().expect("terms built"), n, eps, p)?
                            }
                            "feinstein" => {
                                mimo_feinstein(terms.as_ref().expect("terms built"), eps)?
                            }
                            _ => mimo_cost_dt(&spec, eps, samples, seed.child(1), p)?,
                        };
                        meta.push(trace_meta(b, &format!("n={n}"), &cp));
                        (cp.rate, cp.std_err_bits / n as f64)
                    }
                    _ => unreachable!("bound list is validated"),
                };
                rows.push(vec![n.into(), b.as_str().into(), rate.into(), se.into()]);
            }
            Ok(PointOut { rows, meta })
        })
        .collect();
    collect(points, &mut table)?;
    Ok(table)
}

pub fn mimo_735(a: &Mimo735Args) -> Res<Table> {
    check_common(&a.common)?;
    let snr = mimo_base(&a.dims)?;
    let d = &a.dims;
    let c = &a.common;
    if a.n == 0 || a.n % d.nc != 0 {
        return Err(CliError::Arg(format!(
            "n must be a positive multiple of nc={}, got {}",
            d.nc, a.n
        )));
    }
    let tau = a.tau.unwrap_or(c.eps / 2.0);
    if !(tau > 0.0 && tau < c.eps) {
        return Err(CliError::Arg(format!(
            "tau must lie in (0, eps), got {tau}"
        )));
    }
    let samples = c.samples.unwrap_or(MIMO_DEFAULT);
    let spec = MimoSpec::with_blocklength(d.mt, d.mr, d.nc, a.n, snr)?;
    let alpha = 1.0 - c.eps + tau;
    let seed = SeedSpec::new(c.seed, 0);
    let peaky = mimo_peaky_codeword_beta(&spec, alpha, samples, seed.child(0))?;
    let joint = mimo_joint_estimator(&spec, alpha, samples, seed.child(1))?.beta(alpha)?;
    let mut table = Table::new(&["quantity", "neg_log2_beta", "std_err"]);
    base_meta(&mut table, "mimo-735", c, Some(samples));
    mimo_meta(&mut table, d);
    table.meta(format!(
        "n: {} tau: {} alpha: {}",
        a.n,
        sig9(tau),
        sig9(alpha)
    ));
    table.meta("peaky: codeword with all energy in one entry; joint: sphere input against the capacity-achieving output");
    let se = |b: &betabeta::nptest::BetaEstimate| b.std_err_log / LN_2;
    table.row(vec![
        "peaky".into(),
        (-peaky.log2()).into(),
        se(&peaky).into(),
    ]);
    table.row(vec![
        "joint".into(),
        (-joint.log2()).into(),
        se(&joint).into(),
    ]);
    let diff_se = (se(&peaky).powi(2) + se(&joint).powi(2)).sqrt();
    table.row(vec![
        "difference".into(),
        (joint.log2() - peaky.log2()).into(),
        diff_se.into(),
    ]);
    Ok(table)
}

pub fn npbeta(a: &NpArgs) -> Res<Table> {
    check_common(&a.common)?;
    let c = &a.common;
    let samples = c.samples.unwrap_or(MC_DEFAULT);
    let exact = beta_gaussian_shift(a.shift, a.alpha)?;
    let mc = beta_mc(
        &GaussianShiftModel { d: a.shift },
        a.alpha,
        samples,
        SeedSpec::new(c.seed, 0),
    )?;
    let mut table = Table::new(&["method", "alpha", "beta", "log2_beta", "std_err_log2"]);
    base_meta(&mut table, "npbeta", c, Some(samples));
    table.meta(format!("P = N({}, 1), Q = N(0, 1)", sig9(a.shift)));
    for (name, b) in [("closed_form", exact), ("monte_carlo", mc)] {
        table.row(vec![
            name.into(),
            a.alpha.into(),
            b.value().into(),
            b.log2().into(),
            (b.std_err_log / LN_2).into(),
        ]);
    }
    Ok(table)
}
