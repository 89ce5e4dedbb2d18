use crate::error::{param, Result};
use crate::linalg::svd;
use crate::matrix::DenseMatrix;

/// Top-`k` right singular vectors of the sampled rows, each scaled by
/// `1/√p`. Returns `width × min(k, width)` with orthonormal columns.
pub fn linear_time_svd(rows: &[Vec<f64>], probs: &[f64], k: usize, width: usize) -> Result<DenseMatrix> {
    if rows.len() != probs.len() {
        return param("one probability per sampled row");
    }
    if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return param("sampling probabilities must lie in (0,1]");
    }
    if rows.iter().any(|r| r.len() != width) {
        return param("sampled rows must have the common width");
    }
    let r = k.min(width);
    let height = rows.len().max(r).max(1);
    let mut c = DenseMatrix::zeros(height, width);
    for (i, (row, &p)) in rows.iter().zip(probs).enumerate() {
        let w = 1.0 / p.sqrt();
        for (j, &x) in row.iter().enumerate() {
            c.set(i, j, w * x);
        }
    }
    let v = svd(&c).v;
    Ok(DenseMatrix::from_fn(width, r, |i, j| v.get(i, j)))
}
