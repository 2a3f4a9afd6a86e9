//! Seed derivation and sampling helpers.
//!
//! Every trial owns independent ChaCha streams derived from a master seed by
//! [`derive_seed`], so results do not depend on how trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed `splitmix64(parent + (index + 1) * 0x9E3779B97F4A7C15)`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-stream labels used within one trial.
pub mod label {
    pub const GRAPH: u64 = 0;
    pub const RATES: u64 = 1;
    pub const SOURCE: u64 = 2;
    pub const CASCADE: u64 = 3;
    pub const OBSERVATION: u64 = 4;
}

/// Inverse-CDF exponential: `-ln(1 - u) / rate` for `u` uniform on `[0, 1)`.
pub fn exp_from_uniform(u: f64, rate: f64) -> f64 {
    -(-u).ln_1p() / rate
}

pub fn sample_exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    exp_from_uniform(rng.random::<f64>(), rate)
}
