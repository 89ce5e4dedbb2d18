//! Planted signals `A = λX + G` with `X` a disjoint sparse rank-`k` matrix of
//! operator norm 1: generators, detection in both sparsity regimes, and
//! net-based estimation from Gaussian measurements.

mod detect;
mod estimate;

pub use detect::{
    calibrate_large_s, calibrate_small_s, detect, detect_large_s, detect_small_s, small_s_regime, DetectParams, CALIBRATION_TRIALS,
    DetectionReport, Regime, TrialStat, Verdict, CALIBRATION_SEED_BASE, FROZEN_LARGE_Z, FROZEN_SMALL_Z,
};
pub use estimate::{estimate_signal, hypothesis_holds, measurement_count, min_n_for_hypothesis, EstimateBackend, Estimate};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::instances::planted_factor;
use crate::matrix::{materialize, DenseMatrix, SparseRankKFactor};
use crate::rng::{derive, normal, normal_vec, rng, sample_indices};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub lambda: f64,
    pub x: SparseRankKFactor,
    pub a: DenseMatrix,
    pub seed: u64,
}

/// `s` uniformly chosen coordinates with i.i.d. standard normal values.
pub fn gen_sparse_vector(n: usize, s: usize, seed: u64) -> Result<Vec<f64>> {
    if s > n {
        return param(format!("s = {s} exceeds n = {n}"));
    }
    let mut r = rng(seed);
    let idx = sample_indices(&mut r, n, s);
    let mut v = vec![0.0; n];
    for i in idx {
        v[i] = normal(&mut r);
    }
    Ok(v)
}

/// `λX + G` with `k` disjoint `s×s` blocks; `τ` drawn as `|N(0,1)|` and
/// rescaled so the largest is 1, which makes `‖X‖₂ = 1`.
pub fn gen_planted(n: usize, s: usize, k: usize, lambda: f64, seed: u64) -> Result<PlantedInstance> {
    if s == 0 || k == 0 || s * k > n {
        return param(format!("cannot place {k} disjoint {s}×{s} blocks in dimension {n}"));
    }
    if !lambda.is_finite() {
        return param("lambda must be finite");
    }
    let mut r = rng(derive(seed, 1));
    let mut taus: Vec<f64> = (0..k).map(|_| normal(&mut r).abs().max(f64::MIN_POSITIVE)).collect();
    let top = taus.iter().cloned().fold(0.0, f64::max);
    taus.iter_mut().for_each(|t| *t /= top);
    let x = planted_factor(&mut r, n, n, s, &taus);
    let g = DenseMatrix::new(n, n, normal_vec(&mut rng(derive(seed, 2)), n * n))?;
    let a = materialize(&x, n, n)?.scale(lambda).add(&g);
    Ok(PlantedInstance { n, s, k, lambda, x, a, seed })
}

/// Null instance `A = G` drawn from the same noise stream as [`gen_planted`].
pub fn gen_null(n: usize, seed: u64) -> Result<DenseMatrix> {
    DenseMatrix::new(n, n, normal_vec(&mut rng(derive(seed, 2)), n * n))
}

/// Smallest power-of-two `s` with at least `s/2` entries of squared value
/// `≥ ‖v‖²/(s(1+log₂ m))`, and that threshold.
pub fn flat_level(v: &[f64]) -> Result<(usize, f64)> {
    let total: f64 = v.iter().map(|x| x * x).sum();
    if total == 0.0 || v.is_empty() {
        return param("flat_level needs a nonzero vector");
    }
    let lg = 1.0 + (v.len() as f64).log2();
    let mut s = 1usize;
    loop {
        let threshold = total / (s as f64 * lg);
        let count = v.iter().filter(|x| *x * *x >= threshold).count();
        if 2 * count >= s {
            return Ok((s, threshold));
        }
        if s >= v.len() {
            return param("no flat level found");
        }
        s *= 2;
    }
}

/// Dyadic level sets of `v` by squared value relative to `‖v‖²`; level `ℓ`
/// holds entries with `v_i² ∈ [‖v‖²/2^{ℓ+1}, ‖v‖²/2^ℓ)`. Zero entries are left out.
pub fn level_sets(v: &[f64]) -> Vec<Vec<usize>> {
    let total: f64 = v.iter().map(|x| x * x).sum();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let l = (total / (x * x)).log2().floor().max(0.0) as usize;
        if out.len() <= l {
            out.resize(l + 1, Vec::new());
        }
        out[l].push(i);
    }
    out
}
