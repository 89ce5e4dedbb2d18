//! One-pass Frobenius-norm sparse LRA over turnstile streams.
//!
//! A [`StreamContext`] registers the sketches its algorithm needs, takes
//! updates until [`StreamContext::finalize`], and afterwards answers
//! recovery queries from sketch state alone.

mod add;
pub mod bounds;
mod context;
mod ltsvd;
mod net;
mod rel;

pub use context::{Algo, StreamConfig, StreamContext};
pub use ltsvd::linear_time_svd;
pub use net::NetRecovery;

use serde::{Deserialize, Serialize};

use crate::linalg::top_k_indices;
use crate::matrix::DenseMatrix;

/// Rank-`≤k` matrix `L Rᵀ` supported on `rows × cols`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicriteriaOutput {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `|rows| × r`.
    pub left: DenseMatrix,
    /// `|cols| × r`.
    pub right: DenseMatrix,
    /// Estimated `‖A − D‖_F²` (for `rel`, the residual inside `rows × cols`).
    pub cost_estimate: f64,
}

impl BicriteriaOutput {
    pub fn zero(k: usize) -> Self {
        Self {
            rows: Vec::new(),
            cols: Vec::new(),
            left: DenseMatrix::zeros(0, k),
            right: DenseMatrix::zeros(0, k),
            cost_estimate: 0.0,
        }
    }

    pub fn rank(&self) -> usize {
        self.left.cols()
    }

    pub fn block(&self) -> DenseMatrix {
        self.left.matmul(&self.right.transpose())
    }

    pub fn to_dense(&self, n: usize, d: usize) -> DenseMatrix {
        let b = self.block();
        let mut out = DenseMatrix::zeros(n, d);
        for (p, &i) in self.rows.iter().enumerate() {
            for (q, &j) in self.cols.iter().enumerate() {
                out.set(i, j, b.get(p, q));
            }
        }
        out
    }
}

/// Indices with `est ≥ threshold`, keeping at most `cap` of the largest
/// (ties to the smaller index), returned sorted.
pub fn select_heavy(est: &[f64], threshold: f64, cap: usize) -> Vec<usize> {
    let masked: Vec<f64> = est.iter().map(|&e| if e >= threshold { e } else { f64::NEG_INFINITY }).collect();
    let passing = masked.iter().filter(|e| e.is_finite()).count();
    top_k_indices(&masked, passing.min(cap))
}

/// `sqrt(Σ est²)` over all but the `b` largest estimates.
pub fn tail_scale(est: &[f64], b: usize) -> f64 {
    let mut sq: Vec<f64> = est.iter().map(|e| e * e).collect();
    sq.sort_by(|x, y| y.total_cmp(x));
    sq.iter().skip(b).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_rule() {
        let est = [0.5, 3.0, 1.0, 3.0, 0.1];
        assert_eq!(select_heavy(&est, 0.9, 10), vec![1, 2, 3]);
        assert_eq!(select_heavy(&est, 0.9, 2), vec![1, 3]);
        assert!(select_heavy(&est, 10.0, 3).is_empty());
        assert!((tail_scale(&est, 2) - (1.0f64 + 0.25 + 0.01).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn output_embedding() {
        let out = BicriteriaOutput {
            rows: vec![1],
            cols: vec![0, 2],
            left: DenseMatrix::from_rows(&[vec![2.0]]).unwrap(),
            right: DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap(),
            cost_estimate: 0.0,
        };
        let d = out.to_dense(2, 3);
        assert_eq!(d.row(1), &[2.0, 0.0, -2.0]);
        assert_eq!(out.rank(), 1);
    }
}
