//! Seeded planted instances shared by tests, benches, acceptance and the CLI.

use serde::{Deserialize, Serialize};

use crate::linalg::singular_values;
use crate::matrix::{materialize, norm2, Component, DenseMatrix, SparseRankKFactor, SparseVec};
use crate::rng::{normal_vec, rng, sample_indices, Rng};

/// `k` disjoint `s`-sparse Gaussian unit vectors in dimension `n`.
pub fn disjoint_sparse_units(r: &mut Rng, n: usize, s: usize, k: usize) -> Vec<SparseVec> {
    use rand::seq::SliceRandom;
    let mut idx = sample_indices(r, n, s * k);
    idx.shuffle(r);
    idx.chunks(s)
        .map(|chunk| {
            let mut vals = normal_vec(r, s);
            let nv = norm2(&vals);
            vals.iter_mut().for_each(|v| *v /= nv);
            SparseVec::new(chunk.iter().copied().zip(vals))
        })
        .collect()
}

/// `Σ τ_j x_j y_jᵀ` with pairwise-disjoint supports.
pub fn planted_factor(r: &mut Rng, n: usize, d: usize, s: usize, taus: &[f64]) -> SparseRankKFactor {
    let k = taus.len();
    let xs = disjoint_sparse_units(r, n, s, k);
    let ys = disjoint_sparse_units(r, d, s, k);
    let components = taus.iter().zip(xs).zip(ys).map(|((&tau, x), y)| Component { tau, x, y }).collect();
    SparseRankKFactor { components, s, k }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantedSpectral {
    pub a: DenseMatrix,
    pub planted: SparseRankKFactor,
    /// `σ_1 ≥ … ≥ σ_k` of the planted part.
    pub sigma: Vec<f64>,
    /// Exact `σ_{k+1}(A)`, the spectral norm of the residual.
    pub sigma_k1: f64,
}

/// Planted sparse singular vectors over an orthogonal Gaussian residual with
/// `‖R‖₂ = 1`; `σ_j = gap · 1.25^{k−j}`, so `σ_k/σ_{k+1} = gap`.
pub fn planted_spectral(n: usize, d: usize, s: usize, k: usize, gap: f64, seed: u64) -> PlantedSpectral {
    let mut r = rng(seed);
    let sigma: Vec<f64> = (1..=k).map(|j| gap * 1.25f64.powi((k - j) as i32)).collect();
    let planted = planted_factor(&mut r, n, d, s, &sigma);
    let g = DenseMatrix::new(n, d, normal_vec(&mut r, n * d)).expect("finite");
    // R = (I − UUᵀ) G (I − VVᵀ), using the disjoint sparse structure.
    let mut res = g;
    for c in &planted.components {
        let xd = c.x.to_dense(n);
        let coef = res.matvec_t(&xd);
        for (&i, &xi) in c.x.idx.iter().zip(&c.x.val) {
            for j in 0..d {
                res.add_at(i, j, -xi * coef[j]);
            }
        }
    }
    for c in &planted.components {
        let yd = c.y.to_dense(d);
        let coef = res.matvec(&yd);
        for i in 0..n {
            for (&j, &yj) in c.y.idx.iter().zip(&c.y.val) {
                res.add_at(i, j, -coef[i] * yj);
            }
        }
    }
    let norm = singular_values(&res)[0];
    let res = res.scale(1.0 / norm);
    let a = materialize(&planted, n, d).expect("valid factor").add(&res);
    PlantedSpectral { a, planted, sigma, sigma_k1: 1.0 }
}

/// Disjoint planted block plus i.i.d. `N(0, noise²)` entries.
pub fn planted_block(n: usize, d: usize, s: usize, taus: &[f64], noise: f64, seed: u64) -> (DenseMatrix, SparseRankKFactor) {
    let mut r = rng(seed);
    let f = planted_factor(&mut r, n, d, s, taus);
    let e = DenseMatrix::new(n, d, normal_vec(&mut r, n * d)).expect("finite").scale(noise);
    (materialize(&f, n, d).expect("valid factor").add(&e), f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_is_planted_plus_unit_residual() {
        let p = planted_spectral(30, 25, 2, 3, 1.05, 4);
        let sv = singular_values(&p.a);
        for (j, s) in p.sigma.iter().enumerate() {
            assert!((sv[j] - s).abs() < 1e-9, "{} vs {s}", sv[j]);
        }
        assert!((sv[3] - 1.0).abs() < 1e-9);
        assert!(p.planted.is_disjoint());
    }

    #[test]
    fn block_is_seeded() {
        let (a, f) = planted_block(10, 10, 2, &[3.0, 2.0], 0.1, 9);
        let (b, g) = planted_block(10, 10, 2, &[3.0, 2.0], 0.1, 9);
        assert_eq!(a, b);
        assert_eq!(f, g);
        assert!(f.validate(10, 10, 1e6).is_ok());
    }
}
