//! Per-user rates in the limit `M, K -> inf` with `rho0 = M / K` fixed, where
//! the active, interferer and protected counts concentrate at
//! `(1 - p) K`, `p_u K` and `p_u K`. Every quantity is normalized by `K`.

use serde::{Deserialize, Serialize};

use super::optimize::{optimize_xi, XiOptimum, DEFAULT_XI_RANGE};
use super::CachingStatistics;
use crate::asymptotics;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Cache-aided scheme.
    Proposed,
    /// Conventional massive MIMO without caching.
    Baseline,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Proposed => "proposed",
            Mode::Baseline => "baseline",
        }
    }
}

/// Large-system operating point. The baseline is the same model with `p = 0`,
/// `p_u = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeSystem {
    pub beta: f64,
    /// `E0 / sigma2`.
    pub snr: f64,
    pub p: f64,
    pub p_u: f64,
}

impl LargeSystem {
    pub fn new(beta: f64, snr: f64, stats: &CachingStatistics, mode: Mode) -> Self {
        match mode {
            Mode::Proposed => LargeSystem { beta, snr, p: stats.p, p_u: stats.p_u },
            Mode::Baseline => LargeSystem { beta, snr, p: 0.0, p_u: 1.0 },
        }
    }

    fn active_fraction(&self) -> Result<f64> {
        let a = 1.0 - self.p;
        if a <= 0.0 {
            return Err(Error::NoActiveUsers);
        }
        Ok(a)
    }

    /// MRT bound `log2(1 + beta rho0 snr / (beta p_u snr + 1 - p))`.
    pub fn mrt(&self, rho0: f64) -> Result<f64> {
        let a = self.active_fraction()?;
        Ok((1.0 + self.beta * rho0 * self.snr / (self.beta * self.p_u * self.snr + a)).log2())
    }

    /// ZF bound `log2(1 + beta (rho0 - p_u) snr / (1 - p))`.
    pub fn zf(&self, rho0: f64) -> Result<f64> {
        let a = self.active_fraction()?;
        if rho0 < self.p_u {
            return Err(Error::ZfInfeasible {
                user: usize::MAX,
                reason: format!("rho0 = {rho0} below the protected load {}", self.p_u),
            });
        }
        Ok((1.0 + self.beta * (rho0 - self.p_u) * self.snr / a).log2())
    }

    /// Deterministic-equivalent RZF rate at normalized regularizer `xi`.
    pub fn rzf(&self, rho0: f64, xi: f64) -> Result<f64> {
        let a = self.active_fraction()?;
        let rho = self.p_u / rho0;
        // per-K normalization: M -> rho0, E_k -> snr / (1 - p), sigma2 -> 1
        let power = self.snr / a;
        let signal = asymptotics::rzf_signal_power(rho0, self.beta, power, rho, xi)?;
        let interference = self.p_u / a * asymptotics::rzf_interference_power(self.beta, self.snr, rho, xi)?;
        Ok((1.0 + signal / (interference + 1.0)).log2())
    }

    /// RZF rate at the numerically optimal `xi`.
    pub fn rzf_optimized(&self, rho0: f64) -> Result<XiOptimum> {
        self.active_fraction()?;
        optimize_xi(|xi| self.rzf(rho0, xi).unwrap_or(f64::NAN), DEFAULT_XI_RANGE)
    }
}
