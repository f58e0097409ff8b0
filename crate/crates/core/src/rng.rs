//! Deterministic random streams for parallel Monte Carlo.
//!
//! Every task owns a stream derived from `(master_seed, family, index)` by a
//! SplitMix64 hash chain, so results do not depend on which worker runs a
//! task or in what order tasks finish.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

/// Stream family for limit-process replicates (scaling experiments use the
/// a-grid index as family).
pub const LIMIT_FAMILY: u64 = 0xF1A7_0000_0000_0001;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for task `index` of stream family `family`.
pub fn derive_seed(master: u64, family: u64, index: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ family);
    splitmix64(h ^ index)
}

pub fn stream(master: u64, family: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, family, index))
}

/// Uniform draw on `(0, 1]`.
#[inline]
pub fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}
