//! Run configuration: flat TOML key-value file, every key optional.
//!
//! ```toml
//! library_size = 100
//! cache_size = 20                 # or a list for sweep-cache: [0, 10, 20]
//! rho0 = { start = 1.05, stop = 3.0, steps = 40, scale = "log" }
//! snr_db = 10.0
//! beta = 0.5
//! precoders = ["mrt", "zf", "rzf"]
//! modes = ["proposed", "baseline"]
//! method = "analytic"             # or "monte-carlo"
//! ```

use serde::{Deserialize, Serialize};

use crate::analysis::{Mode, PrecoderFamily, SweepMethod, SweepTemplate};
use crate::error::{Error, Result};
use crate::scenario::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default = "default_scale")]
    pub scale: Scale,
}

fn default_scale() -> Scale {
    Scale::Linear
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            return Err(Error::config("grid needs at least one step"));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::config("log grid needs positive bounds"));
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| {
                let t = i as f64 / n;
                if i == self.steps - 1 {
                    return self.stop;
                }
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect())
    }
}

/// A scalar, an explicit list, or a generated grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Value(f64),
    List(Vec<f64>),
    Grid(Grid),
}

impl Axis {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            Axis::Value(v) => Ok(vec![*v]),
            Axis::List(v) => Ok(v.clone()),
            Axis::Grid(g) => g.points(),
        }
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        match self {
            Axis::Value(v) => Ok(*v),
            _ => Err(Error::config(format!("`{key}` must be a single value for this command"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CacheAxis {
    Value(usize),
    List(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub antennas: Option<usize>,
    pub users: Option<usize>,
    pub library_size: Option<usize>,
    pub cache_size: Option<CacheAxis>,
    pub file_size_mb: Option<f64>,
    pub snr_db: Option<f64>,
    pub beta: Option<f64>,
    pub noise_power: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub rho0: Option<Axis>,
    pub precoders: Option<Vec<PrecoderFamily>>,
    pub modes: Option<Vec<Mode>>,
    pub method: Option<MethodChoice>,
    /// Normalized RZF regularizer for Monte Carlo runs; optimized when absent.
    pub xi: Option<f64>,
}

pub const DEFAULT_ANTENNAS: usize = 32;
pub const DEFAULT_USERS: usize = 24;
pub const DEFAULT_MC_USERS: usize = 64;
pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_RHO0: f64 = 1.4;
pub const DEFAULT_CACHE_SIZE: usize = 20;

pub fn default_rho0_grid() -> Grid {
    Grid { start: 1.05, stop: 3.0, steps: 40, scale: Scale::Log }
}

pub fn default_cache_grid() -> Vec<usize> {
    (0..=50).step_by(5).collect()
}

impl RunConfig {
    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn precoders(&self) -> Vec<PrecoderFamily> {
        self.precoders.clone().unwrap_or_else(|| PrecoderFamily::ALL.to_vec())
    }

    pub fn modes(&self) -> Vec<Mode> {
        self.modes.clone().unwrap_or_else(|| vec![Mode::Proposed, Mode::Baseline])
    }

    pub fn scalar_cache_size(&self) -> Result<usize> {
        match &self.cache_size {
            None => Ok(DEFAULT_CACHE_SIZE),
            Some(CacheAxis::Value(v)) => Ok(*v),
            Some(CacheAxis::List(_)) => Err(Error::config("`cache_size` must be a single value for this command")),
        }
    }

    pub fn cache_grid(&self) -> Vec<usize> {
        match &self.cache_size {
            None => default_cache_grid(),
            Some(CacheAxis::Value(v)) => vec![*v],
            Some(CacheAxis::List(v)) => v.clone(),
        }
    }

    pub fn scalar_rho0(&self) -> Result<f64> {
        self.rho0.as_ref().map_or(Ok(DEFAULT_RHO0), |a| a.scalar("rho0"))
    }

    pub fn rho0_grid(&self) -> Result<Vec<f64>> {
        match &self.rho0 {
            None => default_rho0_grid().points(),
            Some(a) => a.points(),
        }
    }

    pub fn sweep_method(&self) -> SweepMethod {
        match self.method.unwrap_or(MethodChoice::Analytic) {
            MethodChoice::Analytic => SweepMethod::Analytic,
            MethodChoice::MonteCarlo => SweepMethod::MonteCarlo {
                users: self.users.unwrap_or(DEFAULT_MC_USERS),
                trials: self.trials(),
            },
        }
    }

    pub fn template(&self, cache_size: usize, rho0: f64) -> SweepTemplate {
        let d = SweepTemplate::default();
        SweepTemplate {
            beta: self.beta.unwrap_or(d.beta),
            snr_db: self.snr_db.unwrap_or(d.snr_db),
            noise_power: self.noise_power.unwrap_or(d.noise_power),
            library_size: self.library_size.unwrap_or(d.library_size),
            cache_size,
            rho0,
            seed: self.seed(),
        }
    }

    pub fn system(&self) -> Result<SystemConfig> {
        let users = self.users.unwrap_or(DEFAULT_USERS);
        let mut config = SystemConfig::new(
            self.antennas.unwrap_or(DEFAULT_ANTENNAS),
            users,
            self.library_size.unwrap_or(100),
            self.scalar_cache_size()?,
        )
        .with_seed(self.seed());
        if let Some(v) = self.snr_db {
            config = config.with_snr_db(v);
        }
        if let Some(v) = self.beta {
            config = config.with_beta(v);
        }
        if let Some(v) = self.noise_power {
            config = config.with_noise_power(v);
        }
        if let Some(v) = self.file_size_mb {
            config.file_size_mb = v;
        }
        config.validate()?;
        Ok(config)
    }
}
