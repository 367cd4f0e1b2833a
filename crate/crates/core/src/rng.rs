//! Deterministic per-realization random streams.
//!
//! Every realization gets its own ChaCha20 generator, keyed by
//! `splitmix64(master_seed) ^ splitmix64(index + GOLDEN)` passed through one
//! more splitmix64 round. No generator state is ever shared between
//! realizations, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::C64;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ splitmix64(index.wrapping_add(GOLDEN)))
}

pub fn substream(master_seed: u64, index: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(substream_seed(master_seed, index))
}

/// Circularly-symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
