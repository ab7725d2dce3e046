//! SINR after cache-enabled interference cancellation, Monte Carlo ergodic
//! rates, and the closed-form ergodic-rate lower bounds for MRT and ZF.
//!
//! All rates are in bits/s/Hz. Bound helpers take counts as `f64` so the same
//! formulas serve finite scenarios and expected-count evaluation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::channel::{self, ChannelRealization};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::precoding::{self, PrecoderKind, Precoders};
use crate::scenario::{self, CacheState, DerivedSets, PowerAllocation, SystemConfig};
use crate::stats::{pairwise_sum, Estimate};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MonteCarlo,
    #[serde(rename = "bound")]
    ClosedFormBound,
    Asymptotic,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte-carlo",
            Method::ClosedFormBound => "bound",
            Method::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRate {
    pub user: usize,
    pub rate: f64,
    /// Monte Carlo standard error; `None` for deterministic methods.
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Active users only. Empty when cache states are redrawn every trial.
    pub per_user: Vec<UserRate>,
    pub mean_rate: f64,
    pub mean_stderr: Option<f64>,
    pub method: Method,
    /// Trials that produced a rate.
    pub trials: u64,
    /// Trials dropped because a ZF precoder was infeasible.
    pub infeasible_trials: u64,
    /// Trials dropped because every user was served from cache.
    pub idle_trials: u64,
}

impl RateReport {
    pub fn user(&self, k: usize) -> Option<&UserRate> {
        self.per_user.iter().find(|u| u.user == k)
    }
}

/// `|h_k^H w_k|^2 E_k / (sum_{l in U_k} |h_k^H w_l|^2 E_l + sigma2)`.
pub fn sinr(
    k: usize,
    channel: &DMatrix<C64>,
    precoders: &Precoders,
    power: &PowerAllocation,
    interferers: &[usize],
    noise_power: f64,
) -> f64 {
    let h_k = channel.column(k);
    let gain = |l: usize| {
        let w = precoders.get(l).expect("precoder missing for a transmitting user");
        h_k.dotc(w).norm_sqr()
    };
    let interference: f64 = interferers.iter().map(|&l| gain(l) * power.per_user[l]).sum();
    gain(k) * power.per_user[k] / (interference + noise_power)
}

pub fn rate_from_sinr(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// Lower bound for MRT with arbitrary powers:
/// `log2(1 + beta (M-1) E_k / (sum_{l in U_k} beta E_l + sigma2))`.
pub fn mrt_bound(beta: f64, antennas: f64, power: f64, interferer_powers: &[f64], noise_power: f64) -> f64 {
    let interference: f64 = interferer_powers.iter().map(|e| beta * e).sum();
    (1.0 + beta * (antennas - 1.0) * power / (interference + noise_power)).log2()
}

/// MRT bound under uniform power `E0 / K_bar`.
pub fn mrt_bound_uniform(beta: f64, antennas: f64, n: f64, k_bar: f64, total_power: f64, noise_power: f64) -> f64 {
    (1.0 + beta * (antennas - 1.0) * total_power / (beta * n * total_power + k_bar * noise_power)).log2()
}

/// Conventional massive MIMO MRT bound (`N_k = K - 1`, `K_bar = K`).
pub fn mrt_bound_baseline(beta: f64, antennas: f64, users: f64, total_power: f64, noise_power: f64) -> f64 {
    mrt_bound_uniform(beta, antennas, users - 1.0, users, total_power, noise_power)
}

fn zf_check(antennas: f64, constraints: f64) -> Result<()> {
    if antennas < constraints + 1.0 {
        return Err(Error::ZfInfeasible {
            user: usize::MAX,
            reason: format!("{} antennas cannot null {} users", antennas, constraints),
        });
    }
    Ok(())
}

/// ZF lower bound `log2(1 + beta (M - D_k - 1) E_k / sigma2)`.
pub fn zf_bound(beta: f64, antennas: f64, d: f64, power: f64, noise_power: f64) -> Result<f64> {
    zf_check(antennas, d)?;
    Ok((1.0 + beta * (antennas - d - 1.0) * power / noise_power).log2())
}

pub fn zf_bound_uniform(beta: f64, antennas: f64, d: f64, k_bar: f64, total_power: f64, noise_power: f64) -> Result<f64> {
    zf_bound(beta, antennas, d, total_power / k_bar, noise_power)
}

/// Conventional ZF bound `log2(1 + beta (M - K) E0 / (K sigma2))`.
pub fn zf_bound_baseline(beta: f64, antennas: f64, users: f64, total_power: f64, noise_power: f64) -> Result<f64> {
    zf_bound_uniform(beta, antennas, users - 1.0, users, total_power, noise_power)
}

/// Single-realization ZF rate from the effective channel matrix:
/// `log2(1 + E_k / (||Q (Q^H Q)^{-1} e_1||^2 sigma2))`.
pub fn zf_rate_mc(k: usize, q: &DMatrix<C64>, power: f64, noise_power: f64) -> Result<f64> {
    let x = precoding::zf_direction(k, q)?;
    Ok((1.0 + power / (x.norm_squared() * noise_power)).log2())
}

/// Monte Carlo estimate of `E{||Q (Q^H Q)^{-1} e_1||^2}` for an `M x (D+1)`
/// effective channel with i.i.d. `CN(0, beta)` entries. The exact value,
/// from the mean of a complex inverse Wishart matrix, is `1 / ((M - D - 1) beta)`.
pub fn zf_noise_enhancement_oracle(
    antennas: usize,
    protected: usize,
    beta: f64,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<Estimate> {
    if antennas < protected + 2 {
        return Err(Error::ExpectationDiverges(format!(
            "need M > D + 1 for a finite mean, got M = {antennas}, D = {protected}"
        )));
    }
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    let samples = exec.map(trials as usize, |t| {
        let mut rng = crate::rng::stream(seed, crate::rng::Domain::Validation, t as u64);
        let mut q = channel::draw_fading(antennas, protected + 1, &mut rng);
        q *= C64::from(beta.sqrt());
        precoding::zf_direction(0, &q).map(|x| x.norm_squared())
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&samples))
}

/// How cache states are chosen across Monte Carlo trials.
#[derive(Debug, Clone, PartialEq)]
pub enum CachePolicy {
    /// Average over fading only.
    Fixed(CacheState),
    /// Redraw placement and requests every trial.
    Random,
    /// Empty caches.
    Baseline,
}

/// Rates of `users` for one fading draw. Only the precoders those users need
/// are computed.
fn trial_rates(
    kind: PrecoderKind,
    realization: &ChannelRealization,
    sets: &DerivedSets,
    power: &PowerAllocation,
    users: &[usize],
    noise_power: f64,
) -> Result<Vec<f64>> {
    let mut vectors = vec![None; sets.users()];
    for &k in users {
        for &l in std::iter::once(&k).chain(&sets.interferers[k]) {
            if vectors[l].is_none() {
                vectors[l] = Some(precoding::precoder_for(kind, l, realization, &sets.protected[l])?);
            }
        }
    }
    let precoders = Precoders { vectors };
    Ok(users
        .iter()
        .map(|&k| rate_from_sinr(sinr(k, &realization.channel, &precoders, power, &sets.interferers[k], noise_power)))
        .collect())
}

enum Outcome {
    Rates(Vec<f64>),
    Infeasible,
    Idle,
}

/// Monte Carlo ergodic rate, `E{log2(1 + SINR_k)}`, reported per active user
/// (fixed or baseline policy) or as the scenario average (random policy).
pub fn mc_ergodic_rate(
    config: &SystemConfig,
    policy: &CachePolicy,
    kind: PrecoderKind,
    trials: u64,
    exec: Exec,
) -> Result<RateReport> {
    match policy {
        CachePolicy::Fixed(cs) => {
            let sets = scenario::derive_sets(cs);
            let users = sets.active.clone();
            mc_ergodic_rate_for(config, &sets, kind, &users, trials, exec)
        }
        CachePolicy::Baseline => {
            let sets = scenario::derive_sets(&CacheState::no_caching(config.users));
            let users = sets.active.clone();
            mc_ergodic_rate_for(config, &sets, kind, &users, trials, exec)
        }
        CachePolicy::Random => mc_random_scenarios(config, kind, trials, exec),
    }
}

/// Monte Carlo rates of selected active `users` for fixed sets under uniform power.
pub fn mc_ergodic_rate_for(
    config: &SystemConfig,
    sets: &DerivedSets,
    kind: PrecoderKind,
    users: &[usize],
    trials: u64,
    exec: Exec,
) -> Result<RateReport> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    if let Some(&k) = users.iter().find(|&&k| !sets.is_active[k]) {
        return Err(Error::config(format!("user {k} is not active")));
    }
    let power = scenario::uniform_power(sets, config)?;
    let outcomes = exec.map(trials as usize, |t| {
        let realization = channel::draw_channel_for_trial(config, t as u64);
        trial_rates(kind, &realization, sets, &power, users, config.noise_power)
    });
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(outcomes.len());
    let mut infeasible = 0u64;
    let mut first_err = None;
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(e @ Error::ZfInfeasible { .. }) => {
                infeasible += 1;
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(first_err.unwrap_or(Error::NoActiveUsers));
    }
    let per_user: Vec<UserRate> = users
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let xs: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let e = Estimate::from_samples(&xs);
            UserRate { user: k, rate: e.mean, stderr: Some(e.stderr) }
        })
        .collect();
    let trial_means: Vec<f64> = rows.iter().map(|r| pairwise_sum(r) / r.len() as f64).collect();
    let mean = Estimate::from_samples(&trial_means);
    Ok(RateReport {
        per_user,
        mean_rate: mean.mean,
        mean_stderr: Some(mean.stderr),
        method: Method::MonteCarlo,
        trials: rows.len() as u64,
        infeasible_trials: infeasible,
        idle_trials: 0,
    })
}

fn mc_random_scenarios(config: &SystemConfig, kind: PrecoderKind, trials: u64, exec: Exec) -> Result<RateReport> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    let outcomes = exec.map(trials as usize, |t| {
        let cs = CacheState::random(config, t as u64);
        let sets = scenario::derive_sets(&cs);
        let Ok(power) = scenario::uniform_power(&sets, config) else {
            return Ok(Outcome::Idle);
        };
        let realization = channel::draw_channel_for_trial(config, t as u64);
        match trial_rates(kind, &realization, &sets, &power, &sets.active, config.noise_power) {
            Ok(r) => Ok(Outcome::Rates(r)),
            Err(Error::ZfInfeasible { .. }) => Ok(Outcome::Infeasible),
            Err(e) => Err(e),
        }
    });
    let (mut means, mut infeasible, mut idle) = (Vec::new(), 0u64, 0u64);
    for o in outcomes {
        match o? {
            Outcome::Rates(r) => means.push(pairwise_sum(&r) / r.len() as f64),
            Outcome::Infeasible => infeasible += 1,
            Outcome::Idle => idle += 1,
        }
    }
    if means.is_empty() {
        return Err(if infeasible > 0 {
            Error::ZfInfeasible { user: usize::MAX, reason: "infeasible in every trial".into() }
        } else {
            Error::NoActiveUsers
        });
    }
    let e = Estimate::from_samples(&means);
    Ok(RateReport {
        per_user: Vec::new(),
        mean_rate: e.mean,
        mean_stderr: Some(e.stderr),
        method: Method::MonteCarlo,
        trials: means.len() as u64,
        infeasible_trials: infeasible,
        idle_trials: idle,
    })
}

/// Deterministic per-user rates for fixed sets under uniform power: the MRT and
/// ZF lower bounds with actual counts, and the large-system RZF rate with
/// `rho_k = D_k / M`, `xi = alpha / M`.
pub fn deterministic_rates(config: &SystemConfig, sets: &DerivedSets, kind: PrecoderKind) -> Result<RateReport> {
    config.validate()?;
    let power = scenario::uniform_power(sets, config)?;
    let m = config.antennas as f64;
    let sigma2 = config.noise_power;
    let mut per_user = Vec::with_capacity(sets.active_count());
    for &k in &sets.active {
        let beta = config.beta[k];
        let e_k = power.per_user[k];
        let rate = match kind {
            PrecoderKind::Mrt => {
                let powers: Vec<f64> = sets.interferers[k].iter().map(|&l| power.per_user[l]).collect();
                mrt_bound(beta, m, e_k, &powers, sigma2)
            }
            PrecoderKind::Zf => zf_bound(beta, m, sets.d(k) as f64, e_k, sigma2)
                .map_err(|_| Error::ZfInfeasible { user: k, reason: "more constraints than antennas".into() })?,
            PrecoderKind::Rzf { alpha } => {
                let xi = alpha / m;
                let interferers: Vec<(f64, f64, f64)> = sets.interferers[k]
                    .iter()
                    .map(|&l| (power.per_user[l], sets.d(l) as f64 / m, xi))
                    .collect();
                asymptotics::rzf_rate(m, beta, e_k, &interferers, sets.d(k) as f64 / m, xi, sigma2)?
            }
        };
        per_user.push(UserRate { user: k, rate, stderr: None });
    }
    let mean_rate = per_user.iter().map(|u| u.rate).sum::<f64>() / per_user.len() as f64;
    let method = match kind {
        PrecoderKind::Rzf { .. } => Method::Asymptotic,
        _ => Method::ClosedFormBound,
    };
    Ok(RateReport {
        per_user,
        mean_rate,
        mean_stderr: None,
        method,
        trials: 0,
        infeasible_trials: 0,
        idle_trials: 0,
    })
}

/// Generic Jensen bound `log2(1 + 1 / E{(I + sigma2) / S})` for user `k`,
/// estimated by Monte Carlo. A diagnostic for precoders without a closed form.
pub fn jensen_bound_mc(
    config: &SystemConfig,
    sets: &DerivedSets,
    kind: PrecoderKind,
    k: usize,
    trials: u64,
    exec: Exec,
) -> Result<f64> {
    let power = scenario::uniform_power(sets, config)?;
    let ratios = exec.map(trials as usize, |t| {
        let realization = channel::draw_channel_for_trial(config, t as u64);
        let s = sinr_of(kind, &realization, sets, &power, k, config.noise_power)?;
        Ok(1.0 / s)
    });
    let ratios: Vec<f64> = ratios.into_iter().collect::<Result<_>>()?;
    let mean = pairwise_sum(&ratios) / ratios.len() as f64;
    Ok((1.0 + 1.0 / mean).log2())
}

fn sinr_of(
    kind: PrecoderKind,
    realization: &ChannelRealization,
    sets: &DerivedSets,
    power: &PowerAllocation,
    k: usize,
    noise_power: f64,
) -> Result<f64> {
    let r = trial_rates(kind, realization, sets, power, &[k], noise_power)?;
    Ok(2f64.powf(r[0]) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn sinr_single_user() {
        let h = DMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let w = precoding::mrt(&h.column(0).into_owned()).unwrap();
        let p = Precoders { vectors: vec![Some(w)] };
        let s = sinr(0, &h, &p, &PowerAllocation { per_user: vec![1.0] }, &[], 1.0);
        assert!((s - 2.0).abs() < 1e-15);
        assert!((rate_from_sinr(s) - 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_precoder_gives_zero() {
        let h = DMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let w = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let p = Precoders { vectors: vec![Some(w)] };
        assert_eq!(sinr(0, &h, &p, &PowerAllocation { per_user: vec![1.0] }, &[], 1.0), 0.0);
    }

    #[test]
    fn mrt_bound_values() {
        assert_eq!(mrt_bound(0.5, 1.0, 1.0, &[], 1.0), 0.0);
        assert!((mrt_bound(1.0, 2.0, 1.0, &[], 1.0) - 1.0).abs() < 1e-15);
        let v = mrt_bound(0.5, 11.0, 1.25, &[1.25; 4], 1.0);
        assert!((v - (1.0 + 6.25 / 3.5f64).log2()).abs() < 1e-12);
        assert!((v - mrt_bound_uniform(0.5, 11.0, 4.0, 8.0, 10.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn mrt_baseline_single_user() {
        let v = mrt_bound_baseline(0.5, 8.0, 1.0, 10.0, 1.0);
        assert!((v - (1.0 + 0.5 * 7.0 * 10.0f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn zf_bound_values() {
        assert_eq!(zf_bound(0.5, 5.0, 4.0, 1.0, 1.0).unwrap(), 0.0);
        assert!((zf_bound(1.0, 2.0, 0.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((zf_bound(0.5, 11.0, 4.0, 1.25, 1.0).unwrap() - 4.75f64.log2()).abs() < 1e-12);
        assert!((zf_bound_uniform(0.5, 11.0, 4.0, 8.0, 10.0, 1.0).unwrap() - 4.75f64.log2()).abs() < 1e-12);
        assert!(zf_bound(0.5, 4.0, 4.0, 1.0, 1.0).is_err());
        assert!(zf_bound_baseline(0.5, 7.0, 8.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn zf_rate_single_column() {
        let h = DMatrix::from_column_slice(2, 1, &[C64::new(1.0, 1.0), C64::new(0.0, 2.0)]);
        let r = zf_rate_mc(0, &h, 1.5, 0.5).unwrap();
        assert!((r - (1.0 + 6.0 * 1.5 / 0.5f64).log2()).abs() < 1e-12);
    }
}
