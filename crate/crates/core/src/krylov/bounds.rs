use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ops::{norm_estimate, norm_steps, CountedMatrix, Deflated, EmbeddedLowRank, LinOp};
use crate::linalg::{extract, singular_values};
use crate::matrix::SupportPair;
use crate::rng::derive;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvBounds {
    pub j: usize,
    /// Lower bound on `σ_j²(A)`.
    pub l: f64,
    /// Upper bound on `σ_j²(A)`.
    pub u: f64,
}

impl SvBounds {
    /// `U ≤ (1 + 20ε)·L`.
    pub fn certified(&self, eps: f64) -> bool {
        self.u <= (1.0 + 20.0 * eps) * self.l
    }
}

/// `L = σ_j²(A[S,T])`, a lower bound by interlacing; `U = (1+ε)·est²` where
/// `est` estimates `‖A − B‖₂` for the rank-`(j−1)` approximation `B` of the block.
pub fn sv_bounds(a: &CountedMatrix<'_>, sup: &SupportPair, j: usize, eps: f64, seed: u64) -> SvBounds {
    assert!(j >= 1, "singular value index is 1-based");
    let block = extract(a.matrix(), &sup.rows, &sup.cols);
    let sv = singular_values(&block);
    let l = sv.get(j - 1).map_or(0.0, |x| x * x);
    let b = EmbeddedLowRank::from_block(a.matrix(), &sup.rows, &sup.cols, j - 1);
    let est = deflated_norm(a, &b, eps, seed);
    SvBounds { j, l, u: (1.0 + eps) * est * est }
}

pub(crate) fn deflated_norm(a: &CountedMatrix<'_>, b: &EmbeddedLowRank, eps: f64, seed: u64) -> f64 {
    let steps = norm_steps(a.rows(), a.cols(), eps);
    norm_estimate(&Deflated { a, b }, steps, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaInterval {
    pub lo: f64,
    pub hi: f64,
    /// Largest `j ≤ k` whose bounds certified; 0 if none.
    pub j_star: usize,
    pub bounds: Vec<SvBounds>,
}

/// Interval `[E/(1+√ε), E(1+√ε)]` around an estimate `E` of `σ_{k+1}(A)`.
pub fn find_sigma_k1(a: &CountedMatrix<'_>, sup: &SupportPair, k: usize, eps: f64, seed: u64) -> SigmaInterval {
    if k >= a.rows().min(a.cols()) {
        return SigmaInterval { lo: 0.0, hi: 1e-12, j_star: k, bounds: Vec::new() };
    }
    let mut cache: BTreeMap<usize, SvBounds> = BTreeMap::new();
    let bound = |j: usize, cache: &mut BTreeMap<usize, SvBounds>| {
        *cache.entry(j).or_insert_with(|| sv_bounds(a, sup, j, eps, derive(seed, j as u64)))
    };
    let (mut l, mut h, mut best) = (1usize, k, 0usize);
    while l <= h {
        let mid = (l + h) / 2;
        if bound(mid, &mut cache).certified(eps) {
            best = mid;
            l = mid + 1;
        } else {
            h = mid - 1;
        }
    }
    let e = if best == k {
        let b = EmbeddedLowRank::from_block(a.matrix(), &sup.rows, &sup.cols, k);
        deflated_norm(a, &b, eps, derive(seed, 0))
    } else {
        (bound(best + 1, &mut cache).u / (1.0 + eps)).sqrt()
    };
    let w = 1.0 + eps.sqrt();
    SigmaInterval { lo: e / w, hi: e * w, j_star: best, bounds: cache.into_values().collect() }
}
