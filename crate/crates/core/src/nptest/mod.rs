//! Neyman-Pearson β functions: exact Gaussian closed forms, Monte Carlo
//! estimation by change of measure, and analytic lower/upper bounds.
//!
//! `β_α(P, Q)` is the smallest `Q`-probability of a test that accepts `P`
//! with probability at least `α`. With `L = ln dP/dQ`, the optimal test
//! thresholds `L`, and `Q[L > γ] = E_P[e^{-L} 1{L > γ}]`, so β can be
//! estimated from samples drawn under `P` alone.

mod analytic;
mod estimate;
mod sample;

pub use analytic::{
    beta_gaussian_shift, beta_lower_haroutunian, beta_lower_mean_var, beta_lower_mean_var_with,
    beta_lower_sup_ratio, beta_mixture_upper, beta_upper_from_threshold, beta_variational_lower,
    binary_entropy, geodesic_gaussian, ExponentialFamilyPath,
};
pub use estimate::{BetaEstimate, BetaKind};
pub use sample::{
    beta_mc, calibrate_proposal, np_threshold, BetaEstimator, GaussianShiftModel, LlrDraw,
    LlrModel, LlrSample, NpThreshold, MIN_EFFECTIVE_SAMPLES, MIN_SAMPLES,
};
