//! Self-check suite run by `validate`: closed forms against independent
//! Monte Carlo and quadrature oracles.

use super::output::CheckRecord;
use crate::analysis::{self, CachingStatistics, LargeSystem, Mode, PlacementModel};
use crate::asymptotics;
use crate::channel;
use crate::error::Result;
use crate::exec::Exec;
use crate::rates;
use crate::rng::{self, Domain};
use crate::scenario::{derive_sets, CacheState, SystemConfig};
use crate::stats::pairwise_sum;

pub const DEFAULT_ORACLE_TRIALS: u64 = 100_000;
pub const PU_DRAWS: u64 = 1_000_000;
pub const OFFLOAD_DRAWS: u64 = 10_000;
pub const G_RHO: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];
pub const G_XI: [f64; 4] = [1e-3, 1e-1, 1.0, 10.0];
pub const G_QUADRATURE_POINTS: usize = 40_000;

fn check(name: &str, value: f64, target: f64, tolerance: f64) -> CheckRecord {
    CheckRecord {
        check: name.to_string(),
        value,
        target,
        tolerance,
        passed: (value - target).abs() <= tolerance,
    }
}

/// Mean fraction of active users over `draws` random scenarios.
pub fn mc_active_fraction(config: &SystemConfig, draws: u64, exec: Exec) -> f64 {
    let fractions = exec.map(draws as usize, |t| {
        let sets = derive_sets(&CacheState::random(config, t as u64));
        sets.active_count() as f64 / config.users as f64
    });
    pairwise_sum(&fractions) / draws as f64
}

/// Largest `|xi G^2 + (xi - 1 + rho) G - 1|` over the check grid.
pub fn g_quadratic_residual() -> Result<f64> {
    let mut worst = 0.0f64;
    for rho in G_RHO {
        for xi in G_XI {
            let g = asymptotics::g_closed(rho, xi)?;
            worst = worst.max((xi * g * g + (xi - 1.0 + rho) * g - 1.0).abs());
        }
    }
    Ok(worst)
}

pub fn g_oracle_gap(points: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for rho in G_RHO {
        for xi in G_XI {
            let gap = asymptotics::g_closed(rho, xi)? - asymptotics::g_integral_oracle(rho, xi, points)?;
            worst = worst.max(gap.abs());
        }
    }
    Ok(worst)
}

/// Largest relative gap between the analytic derivative and a central
/// difference with step `1e-6 xi`.
pub fn g_derivative_gap() -> Result<f64> {
    let mut worst = 0.0f64;
    for rho in G_RHO {
        for xi in G_XI {
            let h = 1e-6 * xi;
            let fd = (asymptotics::g_closed(rho, xi + h)? - asymptotics::g_closed(rho, xi - h)?) / (2.0 * h);
            let d = asymptotics::g_derivative(rho, xi)?;
            worst = worst.max(((fd - d) / d).abs());
        }
    }
    Ok(worst)
}

/// Relative ZF rate gain of caching over the baseline in the large-system limit.
pub fn zf_cache_gain(library_size: usize, cache_size: usize, rho0: f64, snr_db: f64, beta: f64) -> Result<f64> {
    let stats = CachingStatistics::new(library_size, cache_size, 2)?;
    let snr = 10f64.powf(snr_db / 10.0);
    let proposed = LargeSystem::new(beta, snr, &stats, Mode::Proposed).zf(rho0)?;
    let baseline = LargeSystem::new(beta, snr, &stats, Mode::Baseline).zf(rho0)?;
    Ok(proposed / baseline - 1.0)
}

pub fn run_checks(seed: u64, trials: Option<u64>, exec: Exec) -> Result<Vec<CheckRecord>> {
    let trials = trials.unwrap_or(DEFAULT_ORACLE_TRIALS);
    let mut out = Vec::new();

    let stats = CachingStatistics::new(100, 20, 100)?;
    out.push(check("pu-closed-form", stats.p_u, 0.51328, 1e-12));
    out.push(check("non-interfering-fraction", 1.0 - stats.p_u, 0.48672, 5e-4));
    let pu = analysis::mc_validate_pu(100, 20, PU_DRAWS, PlacementModel::IndependentPerFile, seed, exec)?;
    out.push(check("pu-monte-carlo", pu.mean, stats.p_u, 3.0 * pu.stderr));

    let config = SystemConfig::new(1, 100, 100, 20).with_seed(seed);
    let active = mc_active_fraction(&config, OFFLOAD_DRAWS, exec);
    out.push(check("active-fraction", active, 1.0 - stats.p, 0.01));

    for (m, beta) in [(4usize, 1.0), (11, 0.5)] {
        let target = 1.0 / (beta * (m as f64 - 1.0));
        let e = channel::inv_norm_expectation_oracle(m, beta, trials, rng_seed(seed, m as u64), exec)?;
        out.push(check(&format!("inv-norm-m{m}"), e.mean, target, 0.02 * target));
    }
    let (m, d, beta) = (8usize, 3usize, 1.0);
    let target = 1.0 / ((m - d - 1) as f64 * beta);
    let e = rates::zf_noise_enhancement_oracle(m, d, beta, trials, rng_seed(seed, 100), exec)?;
    out.push(check("zf-noise-enhancement", e.mean, target, 0.02 * target));

    out.push(check("g-quadratic-residual", g_quadratic_residual()?, 0.0, 1e-12));
    out.push(check("g-integral-oracle", g_oracle_gap(G_QUADRATURE_POINTS)?, 0.0, 1e-6));
    out.push(check("g-derivative", g_derivative_gap()?, 0.0, 1e-6));

    out.push(check("zf-cache-gain", zf_cache_gain(100, 20, 1.4, 10.0, 0.5)?, 0.70, 0.02));
    Ok(out)
}

// distinct seeds per oracle so their errors are independent
fn rng_seed(seed: u64, tag: u64) -> u64 {
    use rand::RngCore;
    rng::stream(seed, Domain::Validation, tag).next_u64()
}
