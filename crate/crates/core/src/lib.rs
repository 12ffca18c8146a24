//! Finite-blocklength channel coding bounds computed from Neyman-Pearson
//! β functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`statcore`]: special functions, log-domain helpers, quadrature and the
//!   seeded random stream contract.
//! * [`nptest`]: β in closed form, by Monte Carlo with change of measure, and
//!   analytic lower/upper bounds.
//! * [`channels`]: AWGN, additive exponential noise, SISO Rayleigh and MIMO
//!   block fading models.
//! * [`bounds`]: β-β achievability and converse plus the DT, Feinstein and
//!   related bounds, with free-parameter search.
//! * [`asymptotics`]: normal and energy-per-bit approximations and the
//!   rate to Eb/N0 solver.
//!
//! All internal quantities are in nats; bits appear only at API edges
//! (`log2M`, rates, capacities).

pub mod asymptotics;
pub mod bounds;
pub mod channels;
pub mod error;
pub mod nptest;
pub mod statcore;

pub use error::{Error, Result};
