use std::collections::HashMap;

use super::hash::SignedHash;
use super::table::{dequantize, quantize, Table};
use super::{median, MeasurementLedger};
use crate::error::{Result, SlraError};
use crate::rng::counter_normal;

/// CountSketch applied on the left of an `n × width` matrix, `r` times.
#[derive(Clone, Debug, PartialEq)]
pub struct RowSketch {
    n: usize,
    buckets: u64,
    seed: u64,
    hashes: Vec<SignedHash>,
    table: Table,
}

impl RowSketch {
    pub fn new(n: usize, width: usize, buckets: u64, reps: usize, seed: u64) -> Self {
        let reps = reps.max(1) | 1;
        let hashes = (0..reps).map(|j| SignedHash::new(seed, j, buckets)).collect();
        Self { n, buckets, seed, hashes, table: Table::new(reps, buckets, width) }
    }

    pub fn reps(&self) -> usize {
        self.hashes.len()
    }

    pub fn width(&self) -> usize {
        self.table.width()
    }

    /// Rows of `vec(A)` measurements: `buckets · width` per rep.
    pub fn measurements(&self) -> u64 {
        self.buckets * self.width() as u64 * self.reps() as u64
    }

    pub fn register(&self, ledger: &mut MeasurementLedger, name: &str) {
        ledger.register(name, self.measurements());
    }

    pub fn update(&mut self, row: usize, col: usize, delta: f64) {
        let q = quantize(delta);
        for (j, h) in self.hashes.iter().enumerate() {
            let v = if h.negative(row as u64) { -q } else { q };
            self.table.add(j, h.bucket(row as u64), col, v);
        }
    }

    /// Adds an already quantized row vector to row `row`.
    pub(crate) fn update_row_quantized(&mut self, row: usize, vals: &[i128]) {
        for (j, h) in self.hashes.iter().enumerate() {
            self.table.add_cell(j, h.bucket(row as u64), vals, h.negative(row as u64));
        }
    }

    pub fn merge(&mut self, other: &RowSketch) -> Result<()> {
        if self.n != other.n || self.seed != other.seed || !self.table.same_shape(&other.table) {
            return Err(SlraError::Merge("row sketch configuration differs".into()));
        }
        self.table.merge(&other.table);
        Ok(())
    }

    /// Per-rep signed estimates of row `i`.
    pub fn rep_estimates(&self, i: usize) -> Vec<Vec<f64>> {
        self.hashes
            .iter()
            .enumerate()
            .map(|(j, h)| {
                let s = h.sign(i as u64);
                self.table.cell(j, h.bucket(i as u64)).iter().map(|&v| s * dequantize(v)).collect()
            })
            .collect()
    }

    /// Coordinatewise median over reps.
    pub fn recover_row(&self, i: usize) -> Vec<f64> {
        let reps = self.rep_estimates(i);
        (0..self.width())
            .map(|c| {
                let mut col: Vec<f64> = reps.iter().map(|r| r[c]).collect();
                median(&mut col)
            })
            .collect()
    }
}

/// Row norms of `A` from CountSketches of `A Gᵀ` with an implicit Gaussian `G`.
#[derive(Clone, Debug)]
pub struct RowNormSketch {
    inner: RowSketch,
    g_seed: u64,
    /// Columns of `G / √m` regenerated so far.
    g_cols: HashMap<usize, Vec<f64>>,
}

impl PartialEq for RowNormSketch {
    fn eq(&self, other: &Self) -> bool {
        self.g_seed == other.g_seed && self.inner == other.inner
    }
}

impl RowNormSketch {
    /// `buckets = ⌈4/ε⌉`, `m = ⌈4 ln(n/δ)/α²⌉`, `reps = ⌈8 ln(1/δ)⌉` (odd).
    pub fn with_accuracy(n: usize, eps: f64, alpha: f64, delta: f64, seed: u64) -> Self {
        let buckets = (4.0 / eps).ceil() as u64;
        let m = (4.0 * (n as f64 / delta).ln() / (alpha * alpha)).ceil() as usize;
        Self::new(n, buckets, super::reps_for(delta), m, seed)
    }

    pub fn new(n: usize, buckets: u64, reps: usize, m: usize, seed: u64) -> Self {
        let inner = RowSketch::new(n, m, buckets, reps, crate::rng::derive(seed, 1));
        Self { inner, g_seed: crate::rng::derive(seed, 2), g_cols: HashMap::new() }
    }

    pub fn m(&self) -> usize {
        self.inner.width()
    }

    pub fn measurements(&self) -> u64 {
        self.inner.measurements()
    }

    pub fn register(&self, ledger: &mut MeasurementLedger, name: &str) {
        ledger.register(name, self.measurements());
    }

    pub fn update(&mut self, row: usize, col: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        let (m, g_seed) = (self.m(), self.g_seed);
        let g = self.g_cols.entry(col).or_insert_with(|| {
            let scale = 1.0 / (m as f64).sqrt();
            (0..m).map(|r| scale * counter_normal(g_seed, r as u64, col as u64)).collect()
        });
        let vals: Vec<i128> = g.iter().map(|&x| quantize(delta * x)).collect();
        self.inner.update_row_quantized(row, &vals);
    }

    pub fn merge(&mut self, other: &RowNormSketch) -> Result<()> {
        if self.g_seed != other.g_seed {
            return Err(SlraError::Merge("gaussian seed differs".into()));
        }
        self.inner.merge(&other.inner)
    }

    pub fn estimate(&self, i: usize) -> f64 {
        crate::matrix::norm2(&self.inner.recover_row(i))
    }

    pub fn estimates(&self) -> Vec<f64> {
        (0..self.inner.n).map(|i| self.estimate(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::row_tail_frobenius;
    use crate::matrix::DenseMatrix;
    use crate::rng::{normal_vec, rng};

    fn ingest(a: &DenseMatrix, s: &mut RowSketch) {
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if a.get(i, j) != 0.0 {
                    s.update(i, j, a.get(i, j));
                }
            }
        }
    }

    #[test]
    fn single_row_exact() {
        let mut a = DenseMatrix::zeros(6, 4);
        for j in 0..4 {
            a.set(3, j, j as f64 + 0.5);
        }
        let mut s = RowSketch::new(6, 4, 2, 3, 1);
        ingest(&a, &mut s);
        assert_eq!(s.recover_row(3), a.row(3).to_vec());
        let z = RowSketch::new(6, 4, 2, 3, 1);
        assert!(z.recover_row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_error_within_slack() {
        let n = 40;
        let eps = 0.25;
        let a = DenseMatrix::identity(n);
        let bound = 3.0 * eps * (n as f64 - 4.0);
        for seed in 0..20 {
            let mut s = RowSketch::new(n, n, (1.0 / eps) as u64 * 4, 37, seed);
            ingest(&a, &mut s);
            for i in 0..n {
                let est = s.recover_row(i);
                let err: f64 = est.iter().zip(a.row(i)).map(|(x, y)| (x - y) * (x - y)).sum();
                assert!(err <= bound, "seed {seed} row {i}: {err}");
            }
        }
        // Sanity: the tail used by the bound.
        assert!((row_tail_frobenius(&a, 4).powi(2) - (n as f64 - 4.0)).abs() < 1e-9);
    }

    #[test]
    fn norm_estimates_single_row() {
        let mut s = RowNormSketch::with_accuracy(10, 0.25, 0.25, 0.01, 3);
        let row = [9.0, 0.0, 0.0];
        for (j, &v) in row.iter().enumerate() {
            s.update(2, j, v);
        }
        let e = s.estimate(2);
        assert!((6.75..=11.25).contains(&e), "{e}");
        assert_eq!(s.estimate(0), 0.0);
    }

    #[test]
    fn heavy_rows_selected() {
        // 5 heavy rows of norm 10 on a 64x64 background of small noise.
        let (n, eps, alpha) = (64usize, 1.0 / 16.0, 0.5);
        let heavy = [3usize, 17, 30, 44, 60];
        let mut hits = 0;
        for seed in 0..200u64 {
            let mut r = rng(seed + 500);
            let mut a = DenseMatrix::new(n, n, normal_vec(&mut r, n * n)).unwrap().scale(0.02);
            for &h in &heavy {
                let v = normal_vec(&mut r, n);
                let nv = crate::matrix::norm2(&v);
                for j in 0..n {
                    a.set(h, j, 10.0 * v[j] / nv);
                }
            }
            let mut s = RowNormSketch::with_accuracy(n, eps, alpha, 0.01, seed);
            for i in 0..n {
                for j in 0..n {
                    s.update(i, j, a.get(i, j));
                }
            }
            let est = s.estimates();
            let tail = row_tail_frobenius(&a, (1.0 / eps) as usize);
            // Selection rule: estimate at least (1-α)·10 minus the additive term.
            let thr = (1.0 - alpha) * 10.0 - ((1.0 + alpha) * eps).sqrt() * tail;
            if heavy.iter().all(|&h| est[h] >= thr) {
                hits += 1;
            }
        }
        assert!(hits >= 190, "{hits}");
    }

    #[test]
    fn merge_matches_sequential() {
        let a = DenseMatrix::new(8, 5, normal_vec(&mut rng(2), 40)).unwrap();
        let mut whole = RowNormSketch::new(8, 4, 3, 16, 7);
        let (mut p, mut q) = (RowNormSketch::new(8, 4, 3, 16, 7), RowNormSketch::new(8, 4, 3, 16, 7));
        for i in 0..8 {
            for j in 0..5 {
                whole.update(i, j, a.get(i, j));
                if (i + j) % 2 == 0 { p.update(i, j, a.get(i, j)) } else { q.update(i, j, a.get(i, j)) }
            }
        }
        p.merge(&q).unwrap();
        assert_eq!(p, whole);
    }
}
