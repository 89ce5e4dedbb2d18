use serde::{Deserialize, Serialize};

use super::chebyshev::ChebyshevPoly;
use super::ops::{reorthogonalize, tridiagonal, CountedMatrix, LinOp};
use crate::linalg::{sym_eig, top_k_indices};
use crate::matrix::{dot, norm2, DenseMatrix, SupportPair};
use crate::rng::{normal_vec, rng};

/// Left iterates `(AAᵀ)^i A g` and right iterates `Aᵀ (AAᵀ)^i A g` for `i = 0..=q`.
///
/// Both families live in the span of a Lanczos basis `Q` of `AAᵀ` started at
/// `A g`, with `P = AᵀQ` obtained as a by-product, so any polynomial in `AAᵀ`
/// applied to `A g` is available without further products with `A`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrylovIterates {
    pub q: usize,
    pub g_seed: u64,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
    /// Products with `A` or `Aᵀ` spent building the chain.
    pub matvecs: u64,
    start_norm: f64,
    basis_left: Vec<Vec<f64>>,
    basis_right: Vec<Vec<f64>>,
    ritz: Vec<f64>,
    /// First row of the eigenvector matrix of `T`.
    ritz_weights: Vec<f64>,
    ritz_vecs: Vec<Vec<f64>>,
}

fn combine(basis: &[Vec<f64>], coef: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (b, &c) in basis.iter().zip(coef) {
        out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
    }
    out
}

/// Lanczos chain on `AAᵀ`; `2q + 2` products unless the chain breaks down early.
pub fn krylov_build(a: &CountedMatrix<'_>, q: usize, seed: u64) -> KrylovIterates {
    let (n, d) = (a.rows(), a.cols());
    let before = a.matvecs();
    let g = normal_vec(&mut rng(seed), d);
    let v0 = a.apply(&g);
    let start_norm = norm2(&v0);
    let mut basis_left: Vec<Vec<f64>> = Vec::new();
    let mut basis_right: Vec<Vec<f64>> = Vec::new();
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    if start_norm > 0.0 {
        let mut qv: Vec<f64> = v0.iter().map(|x| x / start_norm).collect();
        let mut scale = 0.0f64;
        for j in 0..=q {
            let p = a.apply_t(&qv);
            let alpha = dot(&p, &p);
            scale = scale.max(alpha);
            alphas.push(alpha);
            basis_left.push(qv.clone());
            basis_right.push(p.clone());
            if j == q || basis_left.len() == n {
                break;
            }
            let mut w = a.apply(&p);
            reorthogonalize(&mut w, &basis_left);
            let beta = norm2(&w);
            if beta <= 1e-12 * scale {
                break;
            }
            betas.push(beta);
            qv = w.iter().map(|x| x / beta).collect();
        }
    }
    let m = alphas.len();
    let t = tridiagonal(&alphas, &betas);
    let (ritz, vecs) = if m > 0 { sym_eig(&t) } else { (Vec::new(), DenseMatrix::zeros(0, 0)) };
    let ritz_weights = (0..m).map(|c| vecs.get(0, c)).collect();
    let ritz_vecs = (0..m).map(|c| vecs.col(c)).collect();

    // T^i e1 by repeated tridiagonal products.
    let mut left = Vec::with_capacity(q + 1);
    let mut right = Vec::with_capacity(q + 1);
    let mut c = vec![0.0; m];
    if m > 0 {
        c[0] = start_norm;
    }
    for _ in 0..=q {
        left.push(combine(&basis_left, &c, n));
        right.push(combine(&basis_right, &c, d));
        c = t.matvec(&c);
    }
    KrylovIterates {
        q,
        g_seed: seed,
        left,
        right,
        matvecs: a.matvecs() - before,
        start_norm,
        basis_left,
        basis_right,
        ritz: ritz.iter().map(|&x| x.max(0.0)).collect(),
        ritz_weights,
        ritz_vecs,
    }
}

impl KrylovIterates {
    /// Degree of the odd polynomial in `Σ` reachable from the stored chain.
    pub fn poly_degree(&self) -> usize {
        2 * self.q + 1
    }

    /// `(U p(Σ) Vᵀ g, V Σ p(Σ) Vᵀ g)` for an odd `p` of degree at most `2q+1`.
    pub fn apply_poly(&self, p: &ChebyshevPoly) -> (Vec<f64>, Vec<f64>) {
        debug_assert!(p.q % 2 == 1 && p.q <= self.poly_degree());
        let m = self.ritz.len();
        let mut c = vec![0.0; m];
        for ((&theta, &w), vec) in self.ritz.iter().zip(&self.ritz_weights).zip(&self.ritz_vecs) {
            let h = p.eval_gram(theta) * w * self.start_norm;
            c.iter_mut().zip(vec).for_each(|(ci, v)| *ci += h * v);
        }
        let n = self.left.first().map_or(0, Vec::len);
        let d = self.right.first().map_or(0, Vec::len);
        (combine(&self.basis_left, &c, n), combine(&self.basis_right, &c, d))
    }
}

/// Iteration count `⌈(C/√ε)·ln(s k² √(s r ln n)/ε)⌉` with `r = min(n, d)`.
pub fn power_degree(n: usize, d: usize, s: usize, k: usize, eps: f64, c: f64) -> usize {
    let r = n.min(d) as f64;
    let (s, k) = (s as f64, k as f64);
    let inner = s * k * k * (s * r * (n.max(2) as f64).ln()).sqrt() / eps;
    ((c / eps.sqrt()) * inner.ln().max(1.0)).ceil().max(1.0) as usize
}

fn abs_top(v: &[f64], m: usize) -> Vec<usize> {
    let scores: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    top_k_indices(&scores, m)
}

/// Top-`sk` coordinates of the last left and right iterates.
pub fn support_from(it: &KrylovIterates, s: usize, k: usize) -> SupportPair {
    let left = it.left.last().expect("q ≥ 0");
    let right = it.right.last().expect("q ≥ 0");
    SupportPair::new(abs_top(left, s * k), abs_top(right, s * k))
}

/// Builds the chain with the default degree and returns it with its support.
pub fn power_support(
    a: &CountedMatrix<'_>,
    k: usize,
    s: usize,
    eps: f64,
    c: f64,
    seed: u64,
) -> (SupportPair, KrylovIterates) {
    let q = power_degree(a.rows(), a.cols(), s, k, eps, c);
    let it = krylov_build(a, q, seed);
    (support_from(&it, s, k), it)
}

pub(crate) fn top_coords(v: &[f64], m: usize) -> Vec<usize> {
    abs_top(v, m)
}
