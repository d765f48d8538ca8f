//! Distributed Wyner-Ziv compression design for the uplink of a coordinated
//! cellular network.
//!
//! A decoding base station (BS 0) is helped by `N` cooperative base stations
//! that compress their received signals and forward them over a shared
//! backhaul of `R` bits per channel use. The crate computes the optimal
//! Gaussian compression noises and the resulting achievable rates:
//!
//! * [`numerics`]: Hermitian eigen-decomposition, PSD projection, `log det`.
//! * [`channel`]: hexagonal scenario with path loss, shadowing and fading.
//! * [`covariance`]: conditional covariances of the received signals.
//! * [`rates`]: achievable rate, backhaul usage, bounds, quantization baseline.
//! * [`solver`]: single-source designs (closed form, dual Gauss-Seidel, S-WZ).
//! * [`multiuser`]: two-user sum-rate, weighted sum-rate and rate regions.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod covariance;
pub mod error;
pub mod multiuser;
pub mod numerics;
pub mod rates;
pub mod solver;

pub use error::{DwzError, Result};
