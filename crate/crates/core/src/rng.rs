//! Seedable, splittable random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by
//! `(seed, domain, index)`. The domain separates cache placement, requests and
//! fading; the index is usually the Monte Carlo trial number. Results are
//! therefore independent of how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Placement = 1,
    Requests = 2,
    Fading = 3,
    Validation = 4,
}

const DOMAIN_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// Returns the stream for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (domain as u64).wrapping_mul(DOMAIN_MIX));
    rng.set_stream(index);
    rng
}
