use crate::rng::{mix, splitmix64};

const SIGN_TAG: u64 = 0x5349_474E;

/// Bucket and sign functions for one repetition, keyed by `(seed, rep)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedHash {
    key: u64,
    sign_key: u64,
    buckets: u64,
}

impl SignedHash {
    pub fn new(seed: u64, rep: usize, buckets: u64) -> Self {
        let key = mix(seed, rep as u64);
        Self { key, sign_key: splitmix64(key ^ SIGN_TAG), buckets }
    }

    #[inline]
    pub fn bucket(&self, idx: u64) -> u64 {
        ((mix(self.key, idx) as u128 * self.buckets as u128) >> 64) as u64
    }

    #[inline]
    pub fn negative(&self, idx: u64) -> bool {
        mix(self.sign_key, idx) >> 63 == 1
    }

    #[inline]
    pub fn sign(&self, idx: u64) -> f64 {
        if self.negative(idx) {
            -1.0
        } else {
            1.0
        }
    }
}
