//! Counter-based stream derivation: every random object is drawn from its
//! own generator keyed by `(master seed, purpose, coordinates…)`, so results
//! do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Purpose tags keep streams for different objects apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Unitary = 1,
    MessageSample = 2,
    Auxiliary = 3,
}

/// Generator for the stream named by `key` under `master`.
pub fn stream(master: u64, purpose: Purpose, key: &[u64]) -> StreamRng {
    let mut h = splitmix64(master ^ 0xA076_1D64_78BD_642F);
    h = splitmix64(h ^ purpose as u64);
    for &k in key {
        h = splitmix64(h ^ splitmix64(k));
    }
    let mut seed = [0u8; 32];
    let mut s = h;
    for chunk in seed.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Seed for trial `t` of a multi-trial experiment.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(master) ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
