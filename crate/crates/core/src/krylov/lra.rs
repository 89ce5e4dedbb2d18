use serde::{Deserialize, Serialize};

use super::bounds::{deflated_norm, find_sigma_k1, SigmaInterval};
use super::chebyshev::ChebyshevPoly;
use super::iterates::{power_degree, krylov_build, support_from, top_coords, KrylovIterates};
use super::ops::{CountedMatrix, EmbeddedLowRank};
use crate::error::{param, Result};
use crate::matrix::{Component, DenseMatrix, SparseRankKFactor, SparseVec, SupportPair};
use crate::rng::derive;

/// Default constant in the iteration count.
pub const DEFAULT_POWER_CONSTANT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub k: usize,
    pub s: usize,
    pub eps: f64,
    /// Constant `C` in the iteration count.
    pub c: f64,
    pub seed: u64,
}

impl SpectralParams {
    pub fn new(k: usize, s: usize, eps: f64, seed: u64) -> Self {
        Self { k, s, eps, c: DEFAULT_POWER_CONSTANT, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.s == 0 {
            return param("k and s must be positive");
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return param(format!("eps must lie in (0, 1/2), got {}", self.eps));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return param("power constant must be positive");
        }
        Ok(())
    }
}

/// Grid `lo·(1+ε)^t`, `t = −1..=⌈2/√ε⌉+1`.
pub fn sweep_alphas(lo: f64, eps: f64) -> Vec<f64> {
    let top = (2.0 / eps.sqrt()).ceil() as i32 + 1;
    (-1..=top).map(|t| lo * (1.0 + eps).powi(t)).collect()
}

/// `base` together with the top-`sk` coordinates of `U p_α(Σ) Vᵀ g` (rows)
/// and its right counterpart (columns) for every `α` of the sweep.
pub fn bucket_sweep(
    it: &KrylovIterates,
    base: &SupportPair,
    lo: f64,
    eps: f64,
    s: usize,
    k: usize,
) -> Result<SupportPair> {
    if !(lo > 0.0) {
        return param("bucket sweep needs lo > 0");
    }
    let mut rows = base.rows.clone();
    let mut cols = base.cols.clone();
    let deg = it.poly_degree();
    for alpha in sweep_alphas(lo, eps) {
        let p = ChebyshevPoly::closed_form(deg, alpha, eps.min(1.0))?;
        let (l, r) = it.apply_poly(&p);
        rows.extend(top_coords(&l, s * k));
        cols.extend(top_coords(&r, s * k));
    }
    Ok(SupportPair::new(rows, cols))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralLraOutput {
    /// Rank-`k` factor on `S′ × T′` (components are `|S′|`/`|T′|`-sparse).
    pub factor: SparseRankKFactor,
    /// Estimate of `‖A − Â‖₂`.
    pub err: f64,
    pub base_support: SupportPair,
    pub support: SupportPair,
    pub interval: SigmaInterval,
    pub q: usize,
    /// Products with `A` or `Aᵀ`, including the final error estimate.
    pub matvecs: u64,
    /// Products spent before the final error estimate.
    pub matvecs_algorithm: u64,
    pub flops: u64,
}

pub fn sparse_spectral_lra(a: &DenseMatrix, params: &SpectralParams) -> Result<SpectralLraOutput> {
    params.validate()?;
    let SpectralParams { k, s, eps, c, seed } = *params;
    let op = CountedMatrix::new(a);
    let q = power_degree(a.rows(), a.cols(), s, k, eps, c);
    let it = krylov_build(&op, q, derive(seed, 1));
    let base = support_from(&it, s, k);
    let interval = find_sigma_k1(&op, &base, k, eps, derive(seed, 2));
    let support = if interval.lo > 0.0 {
        bucket_sweep(&it, &base, interval.lo, eps, s, k)?
    } else {
        base.clone()
    };
    let approx = EmbeddedLowRank::from_block(a, &support.rows, &support.cols, k);
    let matvecs_algorithm = op.matvecs();
    let err = deflated_norm(&op, &approx, eps, derive(seed, 3));
    let components = (0..approx.rank())
        .filter(|&i| approx.sigma[i] > 0.0)
        .map(|i| Component {
            tau: approx.sigma[i],
            x: SparseVec::new(approx.rows.iter().copied().zip(approx.u[i].iter().copied())),
            y: SparseVec::new(approx.cols.iter().copied().zip(approx.v[i].iter().copied())),
        })
        .collect();
    let width = support.rows.len().max(support.cols.len()).max(1);
    Ok(SpectralLraOutput {
        factor: SparseRankKFactor { components, s: width, k },
        err,
        base_support: base,
        support,
        interval,
        q,
        matvecs: op.matvecs(),
        matvecs_algorithm,
        flops: op.flops(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;
    use crate::matrix::materialize;

    #[test]
    fn exact_sparse_low_rank() {
        let mut a = DenseMatrix::zeros(30, 30);
        a.set(3, 4, 2.0);
        a.set(3, 9, 1.0);
        a.set(7, 4, -1.0);
        a.set(7, 9, 1.5);
        a.set(20, 21, 0.7);
        let out = sparse_spectral_lra(&a, &SpectralParams::new(2, 2, 0.2, 5)).unwrap();
        let b = materialize(&out.factor, 30, 30).unwrap();
        let true_err = spectral_norm(&a.sub(&b));
        let sv = crate::linalg::singular_values(&a);
        assert!(true_err <= 1.2 * sv[2] + 1e-8, "{true_err} vs {}", sv[2]);
        assert!(out.err <= true_err + 1e-9);
    }

    #[test]
    fn zero_matrix() {
        let a = DenseMatrix::zeros(10, 8);
        let out = sparse_spectral_lra(&a, &SpectralParams::new(1, 2, 0.2, 1)).unwrap();
        assert!(out.factor.components.is_empty());
        assert_eq!(out.err, 0.0);
    }

    #[test]
    fn sweep_cardinality() {
        let alphas = sweep_alphas(1.0, 0.25);
        assert_eq!(alphas.len(), 7);
        assert!((alphas[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_eps() {
        assert!(sparse_spectral_lra(&DenseMatrix::identity(3), &SpectralParams::new(1, 1, 0.6, 0)).is_err());
    }
}
