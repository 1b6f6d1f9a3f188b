//! Seeding helpers.
//!
//! Every random draw in the crate comes from [`Rng`], a PCG XSL-RR 128/64
//! generator (`rand_pcg::Pcg64`). Sub-seeds for independent streams
//! (repetitions, candidate experts, data generation) are derived from a
//! single user seed with a SplitMix64 finalizer so that the stream layout
//! stays stable when parallelised.

use rand::SeedableRng;

pub type Rng = rand_pcg::Pcg64;

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Derive an independent seed for sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
