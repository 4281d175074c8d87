//! Seed derivation and the generator used for every random draw.
//!
//! All randomness is ChaCha8 keyed by a 64-bit seed. Child seeds are derived
//! from a parent by folding labels through the SplitMix64 finalizer, so a root
//! seed fixes every per-`n` and per-seed-index stream regardless of the order
//! in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and a list of labels.
pub fn derive_seed(parent: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(mix64(parent), |acc, &l| mix64(acc ^ mix64(l.wrapping_add(GOLDEN))))
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in [0, 1) with 53 bits of precision.
pub fn uniform(rng: &mut Rng) -> f64 {
    use rand::RngCore;
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n` (n > 0), by rejection so it is exact.
pub fn below(rng: &mut Rng, n: usize) -> usize {
    use rand::RngCore;
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

pub fn gaussian(rng: &mut Rng) -> f64 {
    use rand::Rng as _;
    rng.sample(rand_distr::StandardNormal)
}
