//! i.i.d. Rayleigh block-fading channel draws, `h_k = sqrt(beta_k) g_k` with
//! `g_k ~ CN(0, I_M)`.

use std::io::{self, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{self, Domain};
use crate::scenario::SystemConfig;
use crate::stats::Estimate;
use crate::C64;

/// One fading realization. Matrices are `M x K`: column `k` is user `k`'s
/// antenna vector, so column `k` of `channel` is `h_k` (row `k` of the
/// `K x M` channel matrix `H`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub fading: DMatrix<C64>,
    pub channel: DMatrix<C64>,
}

impl ChannelRealization {
    /// Scales fading columns by `sqrt(beta_k)`.
    pub fn from_fading(fading: DMatrix<C64>, beta: &[f64]) -> Self {
        assert_eq!(fading.ncols(), beta.len());
        let mut channel = fading.clone();
        for (k, mut col) in channel.column_iter_mut().enumerate() {
            col *= C64::from(beta[k].sqrt());
        }
        ChannelRealization { fading, channel }
    }

    pub fn antennas(&self) -> usize {
        self.channel.nrows()
    }

    pub fn users(&self) -> usize {
        self.channel.ncols()
    }

    /// Writes `H` as `K x M` row-major little-endian `complex64` (f32 re, f32 im).
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for col in self.channel.column_iter() {
            for z in col.iter() {
                out.write_all(&(z.re as f32).to_le_bytes())?;
                out.write_all(&(z.im as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Circularly symmetric unit-variance complex Gaussian sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn draw_fading<R: Rng + ?Sized>(antennas: usize, users: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(antennas, users, |_, _| complex_gaussian(rng))
}

pub fn draw_channel<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> ChannelRealization {
    let fading = draw_fading(config.antennas, config.users, rng);
    ChannelRealization::from_fading(fading, &config.beta)
}

/// Channel of Monte Carlo trial `trial`, drawn from its own substream.
pub fn draw_channel_for_trial(config: &SystemConfig, trial: u64) -> ChannelRealization {
    draw_channel(config, &mut rng::stream(config.seed, Domain::Fading, trial))
}

/// Monte Carlo estimate of `E{1 / ||h||^2}` for `h ~ CN(0, beta I_M)`.
/// The exact value is `1 / (beta (M - 1))`; for `M = 1` the mean does not exist.
pub fn inv_norm_expectation_oracle(
    antennas: usize,
    beta: f64,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<Estimate> {
    if antennas < 2 {
        return Err(Error::ExpectationDiverges(
            "inverse chi-square with 2 degrees of freedom has no mean".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    let samples = exec.map(trials as usize, |t| {
        let mut rng = rng::stream(seed, Domain::Validation, t as u64);
        let norm_sq: f64 = (0..antennas).map(|_| complex_gaussian(&mut rng).norm_sqr()).sum();
        1.0 / (beta * norm_sq)
    });
    Ok(Estimate::from_samples(&samples))
}
