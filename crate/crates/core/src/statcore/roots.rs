//! Scalar root finding and one-dimensional maximisation.

use crate::{Error, Result};

/// Brent's method on a bracketing interval `[a, b]` with `f(a)·f(b) <= 0`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::numerical(format!(
            "root not bracketed: f({a})={fa}, f({b})={fb}"
        )));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::numerical(format!("NaN while solving at x={b}")));
        }
    }
    Err(Error::numerical("brent: iteration limit reached"))
}

/// Finds a sign change of an increasing function by stepping out from `x0`,
/// then refines it with [`brent`].
pub fn solve_increasing<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    step: f64,
    xtol: f64,
) -> Result<f64> {
    let f0 = f(x0);
    if f0 == 0.0 {
        return Ok(x0);
    }
    if f0.is_nan() {
        return Err(Error::numerical(format!("NaN at starting point {x0}")));
    }
    let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
    let mut lo = x0;
    let mut h = step;
    for _ in 0..200 {
        let x = lo + dir * h;
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::numerical(format!("NaN while bracketing at x={x}")));
        }
        if fx.signum() != f0.signum() || fx == 0.0 {
            let (a, b) = if dir > 0.0 { (lo, x) } else { (x, lo) };
            return brent(f, a, b, xtol, 400);
        }
        lo = x;
        h *= 2.0;
    }
    Err(Error::numerical("could not bracket root"))
}

/// Result of a free-parameter search: best argument, best value and every
/// probe in evaluation order.
#[derive(Debug, Clone)]
pub struct SearchTrace {
    pub best_x: f64,
    pub best_value: f64,
    pub probes: Vec<(f64, f64)>,
}

/// Maximises `f` on `[lo, hi]`: a coarse uniform grid of `grid` points, then
/// golden-section refinement around the best grid point with `golden`
/// further probes. The reported optimum is the best probe seen.
pub fn grid_golden_max<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid: usize,
    golden: usize,
) -> Result<SearchTrace> {
    if !(hi > lo) || grid < 2 {
        return Err(Error::domain("grid_golden_max needs lo < hi and grid >= 2"));
    }
    let mut probes = Vec::with_capacity(grid + golden);
    let xs: Vec<f64> = (0..grid)
        .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
        .collect();
    for &x in &xs {
        let v = f(x)?;
        probes.push((x, v));
    }
    let best_i = argmax(&probes);
    let mut a = xs[best_i.saturating_sub(1)];
    let mut b = xs[(best_i + 1).min(grid - 1)];
    if golden > 0 {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = f(x1)?;
        let mut f2 = f(x2)?;
        probes.push((x1, f1));
        probes.push((x2, f2));
        for _ in 2..golden {
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1)?;
                probes.push((x1, f1));
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2)?;
                probes.push((x2, f2));
            }
        }
    }
    let i = argmax(&probes);
    Ok(SearchTrace {
        best_x: probes[i].0,
        best_value: probes[i].1,
        probes,
    })
}

fn argmax(p: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, &(_, v)) in p.iter().enumerate() {
        if v > p[best].1 || p[best].1.is_nan() {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn solve_increasing_expands_bracket() {
        let r = solve_increasing(|x| x - 1000.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 1000.0).abs() < 1e-9);
        let r = solve_increasing(|x: f64| x.exp() - 1e-30, 0.0, 1.0, 1e-13).unwrap();
        assert!((r - (1e-30f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn golden_search_reports_best_probe() {
        let t = grid_golden_max(|x| Ok(-(x - 0.37).powi(2)), -3.0, 3.0, 8, 32).unwrap();
        assert!((t.best_x - 0.37).abs() < 1e-5);
        for &(_, v) in &t.probes {
            assert!(t.best_value >= v);
        }
        assert_eq!(t.probes.len(), 40);
    }
}
