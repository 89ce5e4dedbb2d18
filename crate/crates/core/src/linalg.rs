//! Exact dense kernels: one-sided Jacobi SVD, symmetric Jacobi eigensolver,
//! norms, coordinate restriction and tail norms.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::matrix::{axpy, dot, norm2, DenseMatrix, SupportPair};

/// Rotation threshold on the cosine between two working columns.
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 80;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdResult {
    /// `U diag(σ) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let (n, d, r) = (self.u.rows(), self.v.rows(), self.sigma.len());
        let mut out = DenseMatrix::zeros(n, d);
        for t in 0..r {
            let s = self.sigma[t];
            if s == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = s * self.u.get(i, t);
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.add_at(i, j, a * self.v.get(j, t));
                }
            }
        }
        out
    }
}

struct Jacobi {
    /// Orthogonalized working vectors, `sigma_i · u_i` after convergence.
    w: Vec<Vec<f64>>,
    /// Accumulated right rotations, if requested.
    v: Option<Vec<Vec<f64>>>,
}

fn one_sided_jacobi(mut w: Vec<Vec<f64>>, want_v: bool) -> Jacobi {
    let p = w.len();
    let mut v = want_v.then(|| {
        (0..p)
            .map(|i| {
                let mut e = vec![0.0; p];
                e[i] = 1.0;
                e
            })
            .collect::<Vec<_>>()
    });
    let mut norms: Vec<f64> = w.iter().map(|c| dot(c, c)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let (a, b) = (norms[i], norms[j]);
                if a == 0.0 || b == 0.0 {
                    continue;
                }
                let g = dot(&w[i], &w[j]);
                if g.abs() <= JACOBI_TOL * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(j);
                rotate(&mut lo[i], &mut hi[0], c, s);
                if let Some(v) = v.as_mut() {
                    let (lo, hi) = v.split_at_mut(j);
                    rotate(&mut lo[i], &mut hi[0], c, s);
                }
                norms[i] = a - t * g;
                norms[j] = b + t * g;
            }
        }
        // Refresh the running norms to stop drift from the cheap updates.
        for (n, c) in norms.iter_mut().zip(&w) {
            *n = dot(c, c);
        }
        if !rotated {
            break;
        }
    }
    Jacobi { w, v }
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Working vectors are the columns of `A` when `cols <= rows`, else the rows.
fn working_vectors(a: &DenseMatrix) -> (Vec<Vec<f64>>, bool) {
    if a.cols() <= a.rows() {
        ((0..a.cols()).map(|j| a.col(j)).collect(), false)
    } else {
        ((0..a.rows()).map(|i| a.row(i).to_vec()).collect(), true)
    }
}

fn order_desc(sig: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sig.len()).collect();
    idx.sort_by(|&x, &y| sig[y].total_cmp(&sig[x]).then(x.cmp(&y)));
    idx
}

/// All `min(rows, cols)` singular values, nonincreasing.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let (w, _) = working_vectors(a);
    let jac = one_sided_jacobi(w, false);
    let mut s: Vec<f64> = jac.w.iter().map(|c| norm2(c)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Full thin SVD with `r = min(rows, cols)`.
pub fn svd(a: &DenseMatrix) -> SvdResult {
    let (n, d) = (a.rows(), a.cols());
    let r = n.min(d);
    if r == 0 {
        return SvdResult { u: DenseMatrix::zeros(n, 0), sigma: vec![], v: DenseMatrix::zeros(d, 0) };
    }
    let (w, transposed) = working_vectors(a);
    let m = w[0].len();
    let jac = one_sided_jacobi(w, true);
    let rot = jac.v.expect("rotations requested");
    let sig: Vec<f64> = jac.w.iter().map(|c| norm2(c)).collect();
    let order = order_desc(&sig);
    // Left vectors of the working matrix (length m), right vectors (length r).
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut right: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut sigma = Vec::with_capacity(r);
    for &t in &order {
        let s = sig[t];
        sigma.push(s);
        left.push(if s > 0.0 { jac.w[t].iter().map(|x| x / s).collect() } else { vec![0.0; m] });
        right.push(rot[t].clone());
    }
    complete_orthonormal(&mut left, &sigma, m);
    let (uvecs, vvecs) = if transposed { (right, left) } else { (left, right) };
    let u = DenseMatrix::from_fn(n, r, |i, t| uvecs[t][i]);
    let v = DenseMatrix::from_fn(d, r, |j, t| vvecs[t][j]);
    SvdResult { u, sigma, v }
}

/// Replace the vectors belonging to zero singular values by an orthonormal
/// completion of the others.
fn complete_orthonormal(vecs: &mut [Vec<f64>], sigma: &[f64], m: usize) {
    let mut candidate = 0usize;
    for t in 0..vecs.len() {
        if sigma[t] > 0.0 {
            continue;
        }
        loop {
            assert!(candidate < m, "orthonormal completion ran out of candidates");
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            // Two Gram-Schmidt passes; zero placeholders contribute nothing.
            for _ in 0..2 {
                for other in vecs.iter() {
                    let c = dot(other, &e);
                    axpy(-c, other, &mut e);
                }
            }
            let nrm = norm2(&e);
            if nrm > 1e-8 {
                vecs[t] = e.iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

/// Top-`k` singular triplets.
pub fn svd_truncated(a: &DenseMatrix, k: usize) -> Result<SvdResult> {
    let r = a.rows().min(a.cols());
    if k == 0 || k > r {
        return param(format!("rank {k} outside 1..={r}"));
    }
    let full = svd(a);
    Ok(truncate(full, k))
}

pub fn truncate(full: SvdResult, k: usize) -> SvdResult {
    let k = k.min(full.sigma.len());
    let u = DenseMatrix::from_fn(full.u.rows(), k, |i, t| full.u.get(i, t));
    let v = DenseMatrix::from_fn(full.v.rows(), k, |j, t| full.v.get(j, t));
    SvdResult { u, sigma: full.sigma[..k].to_vec(), v }
}

/// Best rank-`k` approximation `A_k` (any `k`, clamped to the rank bound).
pub fn best_rank_k(a: &DenseMatrix, k: usize) -> DenseMatrix {
    if k == 0 || a.rows() == 0 || a.cols() == 0 {
        return DenseMatrix::zeros(a.rows(), a.cols());
    }
    truncate(svd(a), k).reconstruct()
}

/// σ₁(A).
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Symmetric eigendecomposition by cyclic two-sided Jacobi.
/// Returns eigenvalues in nonincreasing order and eigenvectors as columns.
pub fn sym_eig(s: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = s.rows();
    assert_eq!(n, s.cols(), "sym_eig needs a square matrix");
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| s.row(i).to_vec()).collect();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let off: f64 =
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let order = order_desc(&vals);
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let vecs = DenseMatrix::from_fn(n, n, |i, t| v.get(i, order[t]));
    (sorted_vals, vecs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictMode {
    /// `P_S A P_T`: same shape, zeros outside `S × T`.
    Project,
    /// `S_S A S_Tᵀ`: the `|S| × |T|` block.
    Extract,
}

pub fn restrict(a: &DenseMatrix, sup: &SupportPair, mode: RestrictMode) -> Result<DenseMatrix> {
    sup.check(a.rows(), a.cols())?;
    Ok(match mode {
        RestrictMode::Extract => extract(a, &sup.rows, &sup.cols),
        RestrictMode::Project => {
            let mut out = DenseMatrix::zeros(a.rows(), a.cols());
            for &i in &sup.rows {
                for &j in &sup.cols {
                    out.set(i, j, a.get(i, j));
                }
            }
            out
        }
    })
}

/// Unchecked block extraction.
pub fn extract(a: &DenseMatrix, rows: &[usize], cols: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| a.get(rows[i], cols[j]))
}

/// Indices of the `k` largest scores; ties go to the smaller index.
/// The result is sorted by index.
pub fn top_k_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// ‖A‖_F after zeroing the `b` entries of largest magnitude.
pub fn entry_tail_frobenius(a: &DenseMatrix, b: usize) -> f64 {
    let sq: Vec<f64> = a.data().iter().map(|x| x * x).collect();
    tail_after_removing(&sq, b)
}

/// ‖A‖_F after zeroing the `b` rows of largest ℓ2 norm.
pub fn row_tail_frobenius(a: &DenseMatrix, b: usize) -> f64 {
    let sq: Vec<f64> = (0..a.rows()).map(|i| dot(a.row(i), a.row(i))).collect();
    tail_after_removing(&sq, b)
}

fn tail_after_removing(sq: &[f64], b: usize) -> f64 {
    let mut keep = vec![true; sq.len()];
    for i in top_k_indices(sq, b) {
        keep[i] = false;
    }
    sq.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| x).sum::<f64>().sqrt()
}
