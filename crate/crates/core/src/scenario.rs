//! System configuration, cache placement, request generation and the
//! cache-dependent index sets that drive precoding and rate evaluation.
//!
//! Notation: `c(k, l) = 0` iff the file requested by user `k` is cached at
//! user `l`. A user is *active* when `c(k, k) = 1`. For an active user `k`:
//!
//! * the interferer set `U_k = { l != k : c(l, l) = 1, c(l, k) = 1 }`,
//! * the protected set `Lambda_k = { l != k : c(l, l) = 1, c(k, l) = 1 }`.
//!
//! `Lambda_k` lists the active users that cannot cancel user `k`'s stream from
//! their cache, so the precoder of `k` must protect them.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Scenario parameters. Transmit power is derived: `E0 = sigma2 * 10^(snr_db/10)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Base-station antennas `M`.
    pub antennas: usize,
    /// Single-antenna users `K`.
    pub users: usize,
    /// Library size `L_b` in files.
    pub library_size: usize,
    /// Per-user cache capacity `L_u` in files.
    pub cache_size: usize,
    /// File size in MBytes; metadata only.
    pub file_size_mb: f64,
    /// `10 log10(E0 / sigma2)`.
    pub snr_db: f64,
    /// Large-scale fading coefficient per user.
    pub beta: Vec<f64>,
    /// Noise power `sigma2`.
    pub noise_power: f64,
    pub seed: u64,
}

impl SystemConfig {
    /// A configuration with the evaluation defaults: SNR 10 dB, `beta = 0.5`,
    /// unit noise power, 1 MByte files.
    pub fn new(antennas: usize, users: usize, library_size: usize, cache_size: usize) -> Self {
        SystemConfig {
            antennas,
            users,
            library_size,
            cache_size,
            file_size_mb: 1.0,
            snr_db: 10.0,
            beta: vec![0.5; users],
            noise_power: 1.0,
            seed: 0,
        }
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self
    }

    /// Broadcasts one large-scale coefficient to all users.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = vec![beta; self.users];
        self
    }

    pub fn with_betas(mut self, beta: Vec<f64>) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_noise_power(mut self, noise_power: f64) -> Self {
        self.noise_power = noise_power;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Total transmit power `E0`.
    pub fn total_power(&self) -> f64 {
        self.noise_power * 10f64.powf(self.snr_db / 10.0)
    }

    /// Linear transmit SNR `E0 / sigma2`.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::config("antenna count must be positive"));
        }
        if self.users == 0 {
            return Err(Error::config("user count must be positive"));
        }
        if self.library_size == 0 {
            return Err(Error::config("library size must be positive"));
        }
        if self.cache_size > self.library_size {
            return Err(Error::config(format!(
                "cache size {} exceeds library size {}",
                self.cache_size, self.library_size
            )));
        }
        if self.beta.len() != self.users {
            return Err(Error::config(format!(
                "beta has {} entries for {} users",
                self.beta.len(),
                self.users
            )));
        }
        if let Some(b) = self.beta.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::config(format!("beta must be positive, got {b}")));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::config("noise power must be positive"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::config("snr_db must be finite"));
        }
        if !(self.file_size_mb > 0.0) {
            return Err(Error::config("file size must be positive"));
        }
        Ok(())
    }

    /// `L_u / L_b`.
    pub fn caching_probability(&self) -> f64 {
        self.cache_size as f64 / self.library_size as f64
    }
}

/// Each user caches `L_u` distinct files chosen uniformly without replacement.
pub fn place_caches<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Vec<Vec<usize>> {
    (0..config.users)
        .map(|_| {
            let mut files = index::sample(rng, config.library_size, config.cache_size).into_vec();
            files.sort_unstable();
            files
        })
        .collect()
}

/// One uniform request per user over the library.
pub fn draw_requests<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Vec<usize> {
    (0..config.users).map(|_| rng.random_range(0..config.library_size)).collect()
}

/// Cache contents, requests, and the derived status matrix `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheState {
    cached: Vec<Vec<usize>>,
    request: Vec<usize>,
    /// Row-major `K x K`; `true` where `c(k, l) = 1`.
    status: Vec<bool>,
}

impl CacheState {
    /// Builds the status matrix from cache contents and requests.
    pub fn new(cached: Vec<Vec<usize>>, request: Vec<usize>) -> Self {
        assert_eq!(cached.len(), request.len(), "one cache per requesting user");
        let k = request.len();
        let mut status = vec![true; k * k];
        for (row, &file) in request.iter().enumerate() {
            for (col, cache) in cached.iter().enumerate() {
                status[row * k + col] = !cache.contains(&file);
            }
        }
        CacheState { cached, request, status }
    }

    /// Like [`CacheState::new`] but checks that caches hold exactly
    /// `cache_size` distinct files from `[0, library_size)` and requests are in range.
    pub fn try_new(
        cached: Vec<Vec<usize>>,
        request: Vec<usize>,
        library_size: usize,
        cache_size: usize,
    ) -> Result<Self> {
        if cached.len() != request.len() {
            return Err(Error::config("cache and request vectors differ in length"));
        }
        for (user, set) in cached.iter().enumerate() {
            let mut sorted = set.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != set.len() || set.len() != cache_size {
                return Err(Error::config(format!(
                    "user {user} must cache exactly {cache_size} distinct files"
                )));
            }
            if set.iter().any(|&f| f >= library_size) {
                return Err(Error::config(format!("user {user} caches a file outside the library")));
            }
        }
        if let Some(f) = request.iter().find(|&&f| f >= library_size) {
            return Err(Error::config(format!("request {f} outside the library")));
        }
        Ok(CacheState::new(cached, request))
    }

    /// Empty caches: every user active, nothing cancellable. This is the
    /// conventional massive MIMO baseline.
    pub fn no_caching(users: usize) -> Self {
        CacheState::new(vec![Vec::new(); users], vec![0; users])
    }

    /// Realizes an arbitrary status matrix (`status[k][l] = c(k, l)`) with
    /// distinct requests (user `k` asks for file `k`) and caches padded to a
    /// common size with files nobody requests. Returns the state and the
    /// `(library_size, cache_size)` it needs.
    pub fn realize(status: &[Vec<u8>]) -> (Self, usize, usize) {
        let k = status.len();
        let mut cached: Vec<Vec<usize>> = (0..k)
            .map(|l| (0..k).filter(|&row| status[row][l] == 0).collect())
            .collect();
        let cache_size = cached.iter().map(Vec::len).max().unwrap_or(0);
        for set in &mut cached {
            let mut pad = k;
            while set.len() < cache_size {
                set.push(pad);
                pad += 1;
            }
        }
        let library_size = (k + cache_size).max(1);
        (CacheState::new(cached, (0..k).collect()), library_size, cache_size)
    }

    /// Draws placement and requests for `trial` from the config's seed.
    pub fn random(config: &SystemConfig, trial: u64) -> Self {
        let cached = place_caches(config, &mut rng::stream(config.seed, Domain::Placement, trial));
        let request = draw_requests(config, &mut rng::stream(config.seed, Domain::Requests, trial));
        CacheState::new(cached, request)
    }

    pub fn users(&self) -> usize {
        self.request.len()
    }

    /// `c(k, l)` as 0/1.
    pub fn c(&self, k: usize, l: usize) -> u8 {
        self.status[k * self.users() + l] as u8
    }

    pub fn cached(&self) -> &[Vec<usize>] {
        &self.cached
    }

    pub fn requests(&self) -> &[usize] {
        &self.request
    }
}

/// Active set and per-user interferer / protected sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedSets {
    pub is_active: Vec<bool>,
    pub active: Vec<usize>,
    /// `U_k`; empty for inactive users.
    pub interferers: Vec<Vec<usize>>,
    /// `Lambda_k`; empty for inactive users.
    pub protected: Vec<Vec<usize>>,
}

impl DerivedSets {
    /// `K_bar`.
    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// `N_k = |U_k|`.
    pub fn n(&self, k: usize) -> usize {
        self.interferers[k].len()
    }

    /// `D_k = |Lambda_k|`.
    pub fn d(&self, k: usize) -> usize {
        self.protected[k].len()
    }

    pub fn users(&self) -> usize {
        self.is_active.len()
    }
}

pub fn derive_sets(cs: &CacheState) -> DerivedSets {
    let k_total = cs.users();
    let is_active: Vec<bool> = (0..k_total).map(|k| cs.c(k, k) == 1).collect();
    let active: Vec<usize> = (0..k_total).filter(|&k| is_active[k]).collect();
    let mut interferers = vec![Vec::new(); k_total];
    let mut protected = vec![Vec::new(); k_total];
    for &k in &active {
        for &l in &active {
            if l == k {
                continue;
            }
            if cs.c(l, k) == 1 {
                interferers[k].push(l);
            }
            if cs.c(k, l) == 1 {
                protected[k].push(l);
            }
        }
    }
    DerivedSets { is_active, active, interferers, protected }
}

/// Per-user transmit powers; zero for inactive users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub per_user: Vec<f64>,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.per_user.iter().sum()
    }
}

/// `E_k = E0 / K_bar` for every active user.
pub fn uniform_power(sets: &DerivedSets, config: &SystemConfig) -> Result<PowerAllocation> {
    let k_bar = sets.active_count();
    if k_bar == 0 {
        return Err(Error::NoActiveUsers);
    }
    let share = config.total_power() / k_bar as f64;
    let per_user = sets.is_active.iter().map(|&a| if a { share } else { 0.0 }).collect();
    Ok(PowerAllocation { per_user })
}
