use std::fmt;

use crate::statcore::{LogProb, LN_2};
use crate::{Error, Result};

/// How a β value relates to the true `β_α(P, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaKind {
    Exact,
    LowerBound,
    UpperBound,
    McEstimate,
}

impl fmt::Display for BetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BetaKind::Exact => "exact",
            BetaKind::LowerBound => "lower_bound",
            BetaKind::UpperBound => "upper_bound",
            BetaKind::McEstimate => "mc_estimate",
        };
        f.write_str(s)
    }
}

/// A β value or bound, carried in the log domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaEstimate {
    pub log_beta: LogProb,
    pub kind: BetaKind,
    /// Standard error of `ln β` (zero unless Monte Carlo).
    pub std_err_log: f64,
    /// Samples behind the estimate (zero unless Monte Carlo).
    pub n_samples: usize,
}

impl BetaEstimate {
    fn analytic(log_beta: f64, kind: BetaKind) -> Result<Self> {
        if log_beta.is_nan() {
            return Err(Error::numerical("beta evaluated to NaN"));
        }
        Ok(BetaEstimate {
            log_beta: LogProb::saturating(log_beta),
            kind,
            std_err_log: 0.0,
            n_samples: 0,
        })
    }

    pub fn exact(log_beta: f64) -> Result<Self> {
        Self::analytic(log_beta, BetaKind::Exact)
    }

    /// A lower bound; values above 1 are clamped to the trivial bound.
    pub fn lower(log_beta: f64) -> Result<Self> {
        Self::analytic(log_beta, BetaKind::LowerBound)
    }

    pub fn upper(log_beta: f64) -> Result<Self> {
        Self::analytic(log_beta, BetaKind::UpperBound)
    }

    pub fn mc(log_beta: f64, std_err_log: f64, n_samples: usize) -> Result<Self> {
        if n_samples == 0 || !std_err_log.is_finite() || std_err_log < 0.0 {
            return Err(Error::numerical("invalid Monte Carlo estimate"));
        }
        let mut b = Self::analytic(log_beta, BetaKind::McEstimate)?;
        b.std_err_log = std_err_log;
        b.n_samples = n_samples;
        Ok(b)
    }

    /// Same value, relabelled.
    pub fn with_kind(mut self, kind: BetaKind) -> Self {
        self.kind = kind;
        self
    }

    /// Natural log of β.
    pub fn ln(&self) -> f64 {
        self.log_beta.ln()
    }

    pub fn log2(&self) -> f64 {
        self.ln() / LN_2
    }

    pub fn value(&self) -> f64 {
        self.log_beta.prob()
    }

    /// `ln β + z·std_err`: the upper edge of a `z`-sigma interval.
    pub fn ln_upper_edge(&self, z: f64) -> f64 {
        (self.ln() + z * self.std_err_log).min(0.0)
    }

    /// `ln β - z·std_err`: the lower edge of a `z`-sigma interval.
    pub fn ln_lower_edge(&self, z: f64) -> f64 {
        self.ln() - z * self.std_err_log
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_and_edges() {
        let b = BetaEstimate::exact(-2.0).unwrap();
        assert_eq!(b.kind, BetaKind::Exact);
        assert_eq!((b.std_err_log, b.n_samples), (0.0, 0));
        assert!((b.log2() + 2.0 / LN_2).abs() < 1e-15);
        let m = BetaEstimate::mc(-3.0, 0.1, 1000).unwrap();
        assert!((m.ln_upper_edge(3.0) + 2.7).abs() < 1e-12);
        assert!((m.ln_lower_edge(3.0) + 3.3).abs() < 1e-12);
        assert!(BetaEstimate::mc(-3.0, 0.1, 0).is_err());
        assert!(BetaEstimate::exact(f64::NAN).is_err());
        assert_eq!(BetaEstimate::upper(0.5).unwrap().ln(), 0.0);
        assert_eq!(BetaKind::McEstimate.to_string(), "mc_estimate");
    }
}
