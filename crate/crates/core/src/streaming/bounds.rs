//! Deterministic inequalities behind the additive-error reduction, exposed
//! as `(lhs, rhs)` pairs so callers can check them on concrete matrices.

use crate::linalg::best_rank_k;
use crate::matrix::DenseMatrix;

/// Projecting `A` with a basis fitted to `Â`: `‖A − AV̂V̂ᵀ‖²` against
/// `‖A − ÂV̂V̂ᵀ‖² + δ + 2√δ‖A − ÂV̂V̂ᵀ‖` where `δ ≥ ‖Â − A‖²`.
pub fn approx_proj(a: &DenseMatrix, a_hat: &DenseMatrix, v: &DenseMatrix, delta: f64) -> (f64, f64) {
    let p = v.matmul(&v.transpose());
    let lhs = a.sub(&a.matmul(&p)).frobenius_sq();
    let r = a.sub(&a_hat.matmul(&p)).frobenius_norm();
    (lhs, r * r + delta + 2.0 * delta.sqrt() * r)
}

/// A rank-`k` `D` that is `η`-optimal for `Â` is near-optimal for `A`.
pub fn approx_low_rank(a: &DenseMatrix, d: &DenseMatrix, k: usize, delta: f64, eta: f64) -> (f64, f64) {
    let lhs = a.sub(d).frobenius_sq();
    let tail = a.sub(&best_rank_k(a, k)).frobenius_sq();
    let fa = a.frobenius_norm();
    let rhs = tail
        + 2.0 * delta.sqrt() * fa
        + 2.0 * delta
        + eta
        + 2.0 * (delta * (2.0 * delta + 2.0 * fa * fa + eta)).sqrt();
    (lhs, rhs)
}

/// Row-wise `ε` accuracy implies `‖Â − A‖² ≤ ε‖A‖²`.
pub fn approx_row_wise(a: &DenseMatrix, a_hat: &DenseMatrix, eps: f64) -> (f64, f64) {
    (a_hat.sub(a).frobenius_sq(), eps * a.frobenius_sq())
}

/// Smallest `η` with `‖Â − D‖² ≤ ‖Â − Â_k‖² + η`.
pub fn eta_of(a_hat: &DenseMatrix, d: &DenseMatrix, k: usize) -> f64 {
    a_hat.sub(d).frobenius_sq() - a_hat.sub(&best_rank_k(a_hat, k)).frobenius_sq()
}

/// Smallest `ε` with row errors `‖êᵢ − aᵢ‖² ≤ ε‖aᵢ‖²`; rows of `A` that are
/// zero must be reproduced exactly.
pub fn row_eps_of(a: &DenseMatrix, a_hat: &DenseMatrix) -> Option<f64> {
    let mut eps: f64 = 0.0;
    for i in 0..a.rows() {
        let w: f64 = a.row(i).iter().map(|x| x * x).sum();
        let e: f64 = a.row(i).iter().zip(a_hat.row(i)).map(|(x, y)| (x - y) * (x - y)).sum();
        if w == 0.0 {
            if e > 0.0 {
                return None;
            }
        } else {
            eps = eps.max(e / w);
        }
    }
    Some(eps)
}
