//! Cache-aided massive MIMO downlink: cache-aware MRT, ZF and RZF precoders,
//! closed-form ergodic-rate lower bounds, large-system RZF analysis and the
//! Monte Carlo machinery used to cross-check all of them.
//!
//! The crate is organized bottom-up:
//!
//! * [`scenario`] - configuration, cache placement, requests, index sets, power.
//! * [`channel`] - i.i.d. Rayleigh fading draws.
//! * [`precoding`] - unit-norm cache-aware precoders.
//! * [`rates`] - SINR, Monte Carlo ergodic rates and closed-form bounds.
//! * [`asymptotics`] - Marchenko-Pastur resolvent and deterministic RZF powers.
//! * [`analysis`] - caching statistics, regularizer search and parameter sweeps.
//! * [`cli`] - the `cache-mimo` command-line front end.
//!
//! Parallel Monte Carlo and sweeps go through [`exec::Exec`]; with the
//! `parallel` feature disabled every path runs sequentially and produces the
//! same bits.

pub mod analysis;
pub mod asymptotics;
pub mod channel;
pub mod cli;
pub mod error;
pub mod exec;
pub mod precoding;
pub mod rates;
pub mod rng;
pub mod scenario;
pub mod stats;

pub use error::{Error, Result};
pub use nalgebra::Complex;

/// Complex baseband sample type used throughout.
pub type C64 = Complex<f64>;
