//! Parameter sweeps over antennas-per-user (`rho0`) and cache size.
//!
//! The analytic method evaluates the large-system expressions with expected
//! counts. The Monte Carlo method simulates a finite system with
//! `M = round(rho0 K)` antennas, redrawing caches, requests and fading in
//! every trial; RZF then uses `alpha = xi* M` with `xi*` taken from the
//! analytic optimum of the same mode.

use serde::{Deserialize, Serialize};

use super::large_system::{LargeSystem, Mode};
use super::optimize::DEFAULT_XI_RANGE;
use super::CachingStatistics;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::precoding::PrecoderKind;
use crate::rates::{self, CachePolicy, Method};
use crate::scenario::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderFamily {
    Mrt,
    Zf,
    Rzf,
}

impl PrecoderFamily {
    pub const ALL: [PrecoderFamily; 3] = [PrecoderFamily::Mrt, PrecoderFamily::Zf, PrecoderFamily::Rzf];

    pub fn name(&self) -> &'static str {
        match self {
            PrecoderFamily::Mrt => "mrt",
            PrecoderFamily::Zf => "zf",
            PrecoderFamily::Rzf => "rzf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum SweepMethod {
    /// Closed-form bounds (MRT, ZF) and deterministic equivalents (RZF).
    Analytic,
    MonteCarlo { users: usize, trials: u64 },
}

/// Fixed parameters shared by every sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate {
    pub beta: f64,
    pub snr_db: f64,
    pub noise_power: f64,
    pub library_size: usize,
    pub cache_size: usize,
    pub rho0: f64,
    pub seed: u64,
}

impl Default for SweepTemplate {
    fn default() -> Self {
        SweepTemplate {
            beta: 0.5,
            snr_db: 10.0,
            noise_power: 1.0,
            library_size: 100,
            cache_size: 20,
            rho0: 1.4,
            seed: 0,
        }
    }
}

impl SweepTemplate {
    fn snr(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    ZfInfeasible,
    NoActiveUsers,
    NumericalFailure,
}

impl PointStatus {
    pub fn name(&self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::ZfInfeasible => "zf-infeasible",
            PointStatus::NoActiveUsers => "no-active-users",
            PointStatus::NumericalFailure => "numerical-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub rate: Option<f64>,
    pub stderr: Option<f64>,
    /// Regularizer used for RZF (`alpha / M`).
    pub xi: Option<f64>,
    pub trials: u64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub precoder: PrecoderFamily,
    pub mode: Mode,
    pub method: Method,
    pub points: Vec<SweepPoint>,
}

impl Series {
    /// Rates, `None` where the point was infeasible.
    pub fn rates(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.rate).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: String,
    pub values: Vec<f64>,
    pub series: Vec<Series>,
    pub template: SweepTemplate,
    pub method: SweepMethod,
}

impl SweepResult {
    pub fn series(&self, precoder: PrecoderFamily, mode: Mode) -> Option<&Series> {
        self.series.iter().find(|s| s.precoder == precoder && s.mode == mode)
    }
}

fn status_of(err: &Error) -> Option<PointStatus> {
    match err {
        Error::ZfInfeasible { .. } => Some(PointStatus::ZfInfeasible),
        Error::NoActiveUsers => Some(PointStatus::NoActiveUsers),
        Error::InvalidConfig(_) => None,
        _ => Some(PointStatus::NumericalFailure),
    }
}

fn absent(axis_value: f64, status: PointStatus) -> SweepPoint {
    SweepPoint { axis_value, rate: None, stderr: None, xi: None, trials: 0, status }
}

struct Cell {
    rho0: f64,
    cache_size: usize,
    axis_value: f64,
}

fn evaluate(
    template: &SweepTemplate,
    cell: &Cell,
    precoder: PrecoderFamily,
    mode: Mode,
    method: SweepMethod,
    exec: Exec,
) -> Result<SweepPoint> {
    let stats = CachingStatistics::new(template.library_size, cell.cache_size, 2)?;
    let system = LargeSystem::new(template.beta, template.snr(), &stats, mode);
    let analytic = || -> Result<(f64, Option<f64>)> {
        match precoder {
            PrecoderFamily::Mrt => Ok((system.mrt(cell.rho0)?, None)),
            PrecoderFamily::Zf => Ok((system.zf(cell.rho0)?, None)),
            PrecoderFamily::Rzf => {
                let opt = system.rzf_optimized(cell.rho0)?;
                Ok((opt.rate, Some(opt.xi)))
            }
        }
    };
    let outcome = match method {
        SweepMethod::Analytic => analytic().map(|(rate, xi)| SweepPoint {
            axis_value: cell.axis_value,
            rate: Some(rate),
            stderr: None,
            xi,
            trials: 0,
            status: PointStatus::Ok,
        }),
        SweepMethod::MonteCarlo { users, trials } => {
            let antennas = ((cell.rho0 * users as f64).round() as usize).max(1);
            let config = SystemConfig::new(antennas, users, template.library_size, cell.cache_size)
                .with_snr_db(template.snr_db)
                .with_beta(template.beta)
                .with_noise_power(template.noise_power)
                .with_seed(template.seed);
            let (kind, xi) = match precoder {
                PrecoderFamily::Mrt => (PrecoderKind::Mrt, None),
                PrecoderFamily::Zf => (PrecoderKind::Zf, None),
                PrecoderFamily::Rzf => {
                    let xi = system.rzf_optimized(cell.rho0).map(|o| o.xi).unwrap_or(DEFAULT_XI_RANGE.1);
                    (PrecoderKind::Rzf { alpha: xi * antennas as f64 }, Some(xi))
                }
            };
            let policy = match mode {
                Mode::Proposed => CachePolicy::Random,
                Mode::Baseline => CachePolicy::Baseline,
            };
            rates::mc_ergodic_rate(&config, &policy, kind, trials, exec).map(|r| SweepPoint {
                axis_value: cell.axis_value,
                rate: Some(r.mean_rate),
                stderr: r.mean_stderr,
                xi,
                trials: r.trials,
                status: PointStatus::Ok,
            })
        }
    };
    match outcome {
        Ok(p) => Ok(p),
        Err(e) => match status_of(&e) {
            Some(status) => Ok(absent(cell.axis_value, status)),
            None => Err(e),
        },
    }
}

fn method_tag(precoder: PrecoderFamily, method: SweepMethod) -> Method {
    match (method, precoder) {
        (SweepMethod::MonteCarlo { .. }, _) => Method::MonteCarlo,
        (SweepMethod::Analytic, PrecoderFamily::Rzf) => Method::Asymptotic,
        (SweepMethod::Analytic, _) => Method::ClosedFormBound,
    }
}

fn run(
    template: &SweepTemplate,
    axis: &str,
    cells: Vec<Cell>,
    precoders: &[PrecoderFamily],
    modes: &[Mode],
    method: SweepMethod,
    exec: Exec,
) -> Result<SweepResult> {
    let combos: Vec<(PrecoderFamily, Mode)> =
        precoders.iter().flat_map(|&p| modes.iter().map(move |&m| (p, m))).collect();
    let n = cells.len();
    let flat = exec.map(combos.len() * n, |i| {
        let (precoder, mode) = combos[i / n];
        evaluate(template, &cells[i % n], precoder, mode, method, exec)
    });
    let flat: Vec<SweepPoint> = flat.into_iter().collect::<Result<_>>()?;
    let series = combos
        .iter()
        .zip(flat.chunks(n.max(1)))
        .map(|(&(precoder, mode), points)| Series {
            precoder,
            mode,
            method: method_tag(precoder, method),
            points: points.to_vec(),
        })
        .collect();
    Ok(SweepResult {
        axis: axis.to_string(),
        values: cells.iter().map(|c| c.axis_value).collect(),
        series,
        template: template.clone(),
        method,
    })
}

/// Rate per user versus antennas per user at the template's cache size.
pub fn sweep_rho0(
    template: &SweepTemplate,
    rho0_grid: &[f64],
    precoders: &[PrecoderFamily],
    modes: &[Mode],
    method: SweepMethod,
    exec: Exec,
) -> Result<SweepResult> {
    if let Some(r) = rho0_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::config(format!("rho0 must be positive, got {r}")));
    }
    let cells = rho0_grid
        .iter()
        .map(|&rho0| Cell { rho0, cache_size: template.cache_size, axis_value: rho0 })
        .collect();
    run(template, "rho0", cells, precoders, modes, method, exec)
}

/// Rate per user versus cache size at the template's `rho0`.
pub fn sweep_cache_size(
    template: &SweepTemplate,
    cache_grid: &[usize],
    precoders: &[PrecoderFamily],
    modes: &[Mode],
    method: SweepMethod,
    exec: Exec,
) -> Result<SweepResult> {
    if let Some(lu) = cache_grid.iter().find(|&&lu| lu > template.library_size) {
        return Err(Error::config(format!("cache size {lu} exceeds library size {}", template.library_size)));
    }
    let cells = cache_grid
        .iter()
        .map(|&cache_size| Cell { rho0: template.rho0, cache_size, axis_value: cache_size as f64 })
        .collect();
    run(template, "cache_size", cells, precoders, modes, method, exec)
}
