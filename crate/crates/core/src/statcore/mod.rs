//! Special functions, log-domain arithmetic, quadrature and seeded random
//! streams.

mod bessel;
mod chi2;
mod gamma;
mod logspace;
mod normal;
pub mod quad;
mod rng;
pub mod roots;

pub use bessel::log_bessel_i;
pub use chi2::{
    log_chi2_pdf, log_noncentral_chi2_pdf, noncentral_chi2_cdf, noncentral_chi2_log_cdf,
    noncentral_chi2_log_sf, noncentral_chi2_quantile, noncentral_chi2_quantile_upper,
    noncentral_chi2_sf,
};
pub use gamma::{
    gamma_quantile, gamma_quantile_upper, ln_gamma, log_gamma_p, log_gamma_prefactor, log_gamma_q,
    log_poisson_pmf, regularized_gamma_cdf, regularized_gamma_sf,
};
pub use logspace::{log1mexp, log_add_exp, log_sub_exp, log_sum_exp, LogProb, LN_2};
pub use normal::{log_phi, log_q, q_func, q_inv};
pub use rng::{sample_chunks, SeedSpec, StreamRng, CHUNK_SIZE};
