use std::cell::Cell;

use crate::linalg::sym_eig;
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::rng::{normal_vec, rng};

/// A linear map accessed only through products.
pub trait LinOp {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_t(&self, y: &[f64]) -> Vec<f64>;
}

/// `A` with a counter of multiplications by `A` or `Aᵀ`.
pub struct CountedMatrix<'a> {
    a: &'a DenseMatrix,
    nnz: u64,
    matvecs: Cell<u64>,
}

impl<'a> CountedMatrix<'a> {
    pub fn new(a: &'a DenseMatrix) -> Self {
        Self { a, nnz: a.nnz() as u64, matvecs: Cell::new(0) }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        self.a
    }

    pub fn matvecs(&self) -> u64 {
        self.matvecs.get()
    }

    /// Scalar work, `nnz(A)` per product.
    pub fn flops(&self) -> u64 {
        self.matvecs.get() * self.nnz
    }
}

impl LinOp for CountedMatrix<'_> {
    fn rows(&self) -> usize {
        self.a.rows()
    }
    fn cols(&self) -> usize {
        self.a.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvecs.set(self.matvecs.get() + 1);
        self.a.matvec(x)
    }
    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        self.matvecs.set(self.matvecs.get() + 1);
        self.a.matvec_t(y)
    }
}

/// Rank-`r` matrix `Σ σ_i u_i v_iᵀ` living on rows `rows` and columns `cols`.
#[derive(Clone, Debug, Default)]
pub struct EmbeddedLowRank {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub sigma: Vec<f64>,
    /// `u[i]` has length `rows.len()`.
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl EmbeddedLowRank {
    /// Top `r` singular triplets of `A[rows, cols]`.
    pub fn from_block(a: &DenseMatrix, rows: &[usize], cols: &[usize], r: usize) -> Self {
        let mut out = Self { rows: rows.to_vec(), cols: cols.to_vec(), ..Default::default() };
        if r == 0 || rows.is_empty() || cols.is_empty() {
            return out;
        }
        let svd = crate::linalg::svd(&crate::linalg::extract(a, rows, cols));
        for i in 0..r.min(svd.sigma.len()) {
            out.sigma.push(svd.sigma[i]);
            out.u.push(svd.u.col(i));
            out.v.push(svd.v.col(i));
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn apply(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for ((s, u), v) in self.sigma.iter().zip(&self.u).zip(&self.v) {
            let c = s * v.iter().zip(&self.cols).map(|(vj, &j)| vj * x[j]).sum::<f64>();
            for (ui, &i) in u.iter().zip(&self.rows) {
                out[i] += c * ui;
            }
        }
        out
    }

    pub fn apply_t(&self, y: &[f64], d: usize) -> Vec<f64> {
        let mut out = vec![0.0; d];
        for ((s, u), v) in self.sigma.iter().zip(&self.u).zip(&self.v) {
            let c = s * u.iter().zip(&self.rows).map(|(ui, &i)| ui * y[i]).sum::<f64>();
            for (vj, &j) in v.iter().zip(&self.cols) {
                out[j] += c * vj;
            }
        }
        out
    }

    pub fn to_dense(&self, n: usize, d: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, d);
        for ((s, u), v) in self.sigma.iter().zip(&self.u).zip(&self.v) {
            for (ui, &i) in u.iter().zip(&self.rows) {
                for (vj, &j) in v.iter().zip(&self.cols) {
                    m.add_at(i, j, s * ui * vj);
                }
            }
        }
        m
    }
}

/// `A − B` for an embedded low-rank `B`.
pub struct Deflated<'a, A: LinOp> {
    pub a: &'a A,
    pub b: &'a EmbeddedLowRank,
}

impl<A: LinOp> LinOp for Deflated<'_, A> {
    fn rows(&self) -> usize {
        self.a.rows()
    }
    fn cols(&self) -> usize {
        self.a.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.a.apply(x);
        let b = self.b.apply(x, self.a.rows());
        y.iter_mut().zip(b).for_each(|(p, q)| *p -= q);
        y
    }
    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.a.apply_t(y);
        let b = self.b.apply_t(y, self.a.cols());
        x.iter_mut().zip(b).for_each(|(p, q)| *p -= q);
        x
    }
}

/// Orthogonalizes `w` against `basis` twice.
pub(crate) fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Lanczos steps on `MᵀM` needed for a `(1+ε)` estimate of `‖M‖₂`.
pub fn norm_steps(n: usize, d: usize, eps: f64) -> usize {
    ((4.0 * n.min(d).max(1) as f64).ln() / eps.sqrt()).ceil().max(1.0) as usize
}

/// Estimate of `‖M‖₂` from `steps` Lanczos iterations on `MᵀM` with full
/// reorthogonalization; never exceeds the true norm beyond rounding.
pub fn norm_estimate<M: LinOp>(m: &M, steps: usize, seed: u64) -> f64 {
    let d = m.cols();
    if d == 0 || m.rows() == 0 {
        return 0.0;
    }
    let mut v = normal_vec(&mut rng(seed), d);
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut scale = 0.0f64;
    for _ in 0..steps.min(d) {
        let mut w = m.apply_t(&m.apply(&v));
        let a = dot(&w, &v);
        alphas.push(a);
        scale = scale.max(a.abs());
        basis.push(v.clone());
        reorthogonalize(&mut w, &basis);
        let b = norm2(&w);
        if b <= 1e-12 * scale.max(f64::MIN_POSITIVE) || basis.len() == d {
            break;
        }
        betas.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
    let t = tridiagonal(&alphas, &betas);
    sym_eig(&t).0.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub(crate) fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DenseMatrix {
    let m = alphas.len();
    let mut t = DenseMatrix::zeros(m, m);
    for i in 0..m {
        t.set(i, i, alphas[i]);
        if i + 1 < m {
            t.set(i, i + 1, betas[i]);
            t.set(i + 1, i, betas[i]);
        }
    }
    t
}
