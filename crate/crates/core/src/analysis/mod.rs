//! Probabilistic caching model, large-system rate expressions, regularizer
//! search and the parameter sweeps behind the rate-vs-antennas and
//! rate-vs-cache-size curves.

mod large_system;
mod optimize;
mod sweep;

pub use large_system::{LargeSystem, Mode};
pub use optimize::{optimize_xi, XiOptimum, COARSE_PROBES, DEFAULT_XI_RANGE};
pub use sweep::{
    sweep_cache_size, sweep_rho0, PrecoderFamily, PointStatus, Series, SweepMethod, SweepPoint, SweepResult,
    SweepTemplate,
};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{self, Domain};
use crate::stats::Estimate;

/// Closed-form caching statistics for uniform requests and per-file caching
/// probability `p = L_u / L_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CachingStatistics {
    pub p: f64,
    /// Probability that another user interferes with a given active user.
    pub p_u: f64,
    /// Part of `p_u` where the two users request different files.
    pub p_u1: f64,
    /// Part of `p_u` where both request the same file.
    pub p_u2: f64,
    pub expected_active: f64,
    pub expected_interferers: f64,
    pub expected_protected: f64,
}

impl CachingStatistics {
    pub fn new(library_size: usize, cache_size: usize, users: usize) -> Result<Self> {
        if library_size == 0 || cache_size > library_size {
            return Err(Error::config(format!(
                "need 0 <= cache size ({cache_size}) <= library size ({library_size}), library nonempty"
            )));
        }
        if users == 0 {
            return Err(Error::config("user count must be positive"));
        }
        let lb = library_size as f64;
        let p = cache_size as f64 / lb;
        let miss = 1.0 - p;
        let p_u1 = (1.0 - 1.0 / lb) * miss.powi(3);
        let p_u2 = miss.powi(2) / lb;
        let p_u = p_u1 + p_u2;
        let k = users as f64;
        Ok(CachingStatistics {
            p,
            p_u,
            p_u1,
            p_u2,
            expected_active: miss * k,
            expected_interferers: (k - 1.0) * p_u,
            expected_protected: (k - 1.0) * p_u,
        })
    }
}

/// Exact interference probability when every user caches exactly `L_u`
/// distinct files (placement without replacement). Differs from
/// [`CachingStatistics::p_u`] because two given files are then not absent
/// independently.
pub fn pu_fixed_size(library_size: usize, cache_size: usize) -> f64 {
    let lb = library_size as f64;
    let lu = cache_size as f64;
    let miss = 1.0 - lu / lb;
    let both_missing = if library_size >= 2 { (lb - lu) * (lb - lu - 1.0) / (lb * (lb - 1.0)) } else { 0.0 };
    (1.0 - 1.0 / lb) * miss * both_missing + miss * miss / lb
}

/// How caches are filled when validating the interference probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementModel {
    /// Each (user, file) pair is cached independently with probability `p`.
    IndependentPerFile,
    /// Exactly `L_u` distinct files per user, as in the simulator.
    FixedSize,
}

const PU_BATCH: u64 = 16_384;

/// Monte Carlo frequency of `{c_ll = 1, c_kk = 1, c_lk = 1}` for two users
/// with independent caches and uniform requests.
pub fn mc_validate_pu(
    library_size: usize,
    cache_size: usize,
    draws: u64,
    model: PlacementModel,
    seed: u64,
    exec: Exec,
) -> Result<Estimate> {
    CachingStatistics::new(library_size, cache_size, 2)?;
    if draws == 0 {
        return Err(Error::config("draws must be at least 1"));
    }
    let batches = draws.div_ceil(PU_BATCH);
    let hits: u64 = exec
        .map(batches as usize, |b| {
            let mut rng = rng::stream(seed, Domain::Validation, b as u64);
            let n = PU_BATCH.min(draws - b as u64 * PU_BATCH);
            (0..n).filter(|_| interferes(library_size, cache_size, model, &mut rng)).count() as u64
        })
        .into_iter()
        .sum();
    Ok(Estimate::from_hits(hits, draws))
}

fn interferes<R: Rng>(lb: usize, lu: usize, model: PlacementModel, rng: &mut R) -> bool {
    let req_l = rng.random_range(0..lb);
    let req_k = rng.random_range(0..lb);
    match model {
        PlacementModel::IndependentPerFile => {
            let p = lu as f64 / lb as f64;
            let mut cached = |_: usize| rng.random_bool(p);
            let l_has_own = cached(0);
            let k_has_l = cached(1);
            // same (user, file) coin when both request the same file
            let k_has_own = if req_k == req_l { k_has_l } else { cached(2) };
            !l_has_own && !k_has_l && !k_has_own
        }
        PlacementModel::FixedSize => {
            let cache_l = index::sample(rng, lb, lu);
            let cache_k = index::sample(rng, lb, lu);
            let has = |c: &index::IndexVec, f: usize| c.iter().any(|x| x == f);
            !has(&cache_l, req_l) && !has(&cache_k, req_l) && !has(&cache_k, req_k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_operating_point() {
        let s = CachingStatistics::new(100, 20, 100).unwrap();
        assert!((s.p - 0.2).abs() < 1e-15);
        assert!((s.p_u - 0.51328).abs() < 1e-12);
        assert!((s.expected_active - 80.0).abs() < 1e-12);
        assert!((s.expected_interferers - 99.0 * 0.51328).abs() < 1e-10);
    }

    #[test]
    fn extremes() {
        let none = CachingStatistics::new(100, 0, 10).unwrap();
        assert_eq!((none.p_u, none.expected_active), (1.0, 10.0));
        let full = CachingStatistics::new(100, 100, 10).unwrap();
        assert_eq!(full.p_u, 0.0);
        assert!(CachingStatistics::new(10, 11, 10).is_err());
    }

    #[test]
    fn factorized_components() {
        let (lb, p) = (100.0f64, 0.2f64);
        let s = CachingStatistics::new(100, 20, 5).unwrap();
        let pu1 = lb * (lb - 1.0) * ((1.0 - p) / lb).powi(2) * (1.0 - p);
        let pu2 = lb * ((1.0 - p) / lb).powi(2);
        assert!((s.p_u1 - pu1).abs() < 1e-15);
        assert!((s.p_u2 - pu2).abs() < 1e-15);
    }

    #[test]
    fn fixed_size_small_library() {
        // two files, one cached: users must request the same file and both miss it
        assert!((pu_fixed_size(2, 1) - 0.125).abs() < 1e-15);
        assert_eq!(pu_fixed_size(1, 0), 1.0);
    }

    #[test]
    fn full_cache_never_interferes() {
        for model in [PlacementModel::IndependentPerFile, PlacementModel::FixedSize] {
            let e = mc_validate_pu(10, 10, 1000, model, 3, Exec::Sequential).unwrap();
            assert_eq!(e.mean, 0.0);
        }
        let e = mc_validate_pu(1, 0, 1000, PlacementModel::IndependentPerFile, 3, Exec::Sequential).unwrap();
        assert_eq!(e.mean, 1.0);
    }
}
