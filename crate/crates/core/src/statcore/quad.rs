//! Numerical integration: tanh-sinh on finite intervals, exp-sinh on half
//! lines and fixed-order Gauss-Legendre rules.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

const MAX_LEVEL: usize = 12;

/// Tanh-sinh quadrature of `f` over `[a, b]` to relative tolerance `tol`.
///
/// Endpoint singularities are tolerated; `f` is never evaluated exactly at
/// `a` or `b`.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("tanh_sinh needs a finite interval"));
    }
    if a == b {
        return Ok(0.0);
    }
    let r = 0.5 * (b - a);
    let mut eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance from the nearer endpoint, computed without cancellation
        let d = r / (u.abs().exp() * ch);
        let (x1, x2) = if u >= 0.0 {
            (b - d, a + d)
        } else {
            (a + d, b - d)
        };
        let mut s = 0.0;
        if w > 0.0 {
            let f1 = f(x1);
            let f2 = f(x2);
            if f1.is_finite() {
                s += f1;
            }
            if f2.is_finite() {
                s += f2;
            }
        }
        s * w
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = {
        let mut s = 0.0;
        let mut k = 1;
        while k as f64 * h <= t_max {
            s += eval(k as f64 * h);
            k += 1;
        }
        s + 0.5 * eval(0.0)
    };
    let mut prev = sum * h * r;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h);
            k += 2;
        }
        let cur = sum * h * r;
        if (cur - prev).abs() <= tol * cur.abs() || cur == 0.0 && prev == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::numerical(format!(
        "tanh_sinh did not reach tolerance {tol}"
    )))
}

/// Exp-sinh quadrature of `f` over `[a, ∞)` to relative tolerance `tol`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::domain("integrate_half_line needs a finite start"));
    }
    let mut eval = |t: f64| -> f64 {
        let e = (FRAC_PI_2 * t.sinh()).exp();
        if !(e.is_finite()) || e == 0.0 {
            return 0.0;
        }
        let v = f(a + e);
        if v.is_finite() {
            v * e * FRAC_PI_2 * t.cosh()
        } else {
            0.0
        }
    };
    let (t_lo, t_hi) = (-4.5, 4.5);
    let mut h = 0.5;
    let mut sum = 0.0;
    let n0 = ((t_hi - t_lo) / h) as i64;
    for k in 0..=n0 {
        sum += eval(t_lo + k as f64 * h);
    }
    let mut prev = sum * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let n = ((t_hi - t_lo) / h) as i64;
        let mut k = 1;
        while k <= n {
            sum += eval(t_lo + k as f64 * h);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= tol * cur.abs() || cur == 0.0 && prev == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::numerical(format!(
        "exp_sinh did not reach tolerance {tol}"
    )))
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes mapped to `[a, b]` with matching weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + r * x, r * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let v = tanh_sinh(|x| x.exp(), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        let v = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let v = tanh_sinh(|x| (1.0 - x).ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v + 1.0).abs() < 1e-10);
        assert_eq!(tanh_sinh(|x| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn exp_sinh_half_line() {
        let v = integrate_half_line(|x| (-x).exp(), 0.0, 1e-13).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = integrate_half_line(|x| 1.0 / (1.0 + x * x), 0.0, 1e-12).unwrap();
        assert!((v - FRAC_PI_2).abs() < 1e-10);
        let v = integrate_half_line(|x| x.powi(3) * (-x).exp(), 0.0, 1e-13).unwrap();
        assert!((v - 6.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 64] {
            let g = GaussLegendre::new(n);
            let total: f64 = g.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let v = g.integrate(|x| x.powi(deg as i32 - 1), 0.0, 1.0);
            assert!((v - 1.0 / (deg as f64)).abs() < 1e-13, "n={n}");
        }
        let g = GaussLegendre::new(40);
        let v = g.integrate(f64::cos, 0.0, std::f64::consts::PI);
        assert!(v.abs() < 1e-14);
    }
}
