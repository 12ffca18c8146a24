//! Channel models with exact LLR evaluators and samplers for the joint test
//! `P_XY` vs `P_X Q_Y` and the output test `P_Y` vs `Q_Y`.

pub mod awgn;
pub mod exp;
pub mod mimo;
pub mod rayleigh;
