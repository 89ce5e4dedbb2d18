//! Seed plumbing: a 64-bit mixer for hashing and seed derivation, a
//! counter-based Gaussian for implicit sketch rows, and a seeded PRNG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Child seed for a named substream (trial index, rep index, ...).
#[inline]
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix(seed, tag)
}

/// Uniform in [0, 1) from the top 53 bits.
#[inline]
pub fn unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Map a hash to `0..n` without modulo bias worth caring about.
#[inline]
pub fn bucket(h: u64, n: usize) -> usize {
    ((h as u128 * n as u128) >> 64) as usize
}

/// Standard normal determined entirely by `(key, row, idx)`.
#[inline]
pub fn counter_normal(key: u64, row: u64, idx: u64) -> f64 {
    let h = mix(mix(key, row), idx);
    let u1 = ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    let u2 = unit(splitmix64(h));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut Rng) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}

pub fn normal_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| normal(rng)).collect()
}

/// `k` distinct indices from `0..n`, sorted.
pub fn sample_indices(rng: &mut Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = rand::seq::index::sample(rng, n, k.min(n)).into_vec();
    v.sort_unstable();
    v
}
