//! Shared value types: dense matrices, support pairs and sparse factors.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result, SlraError};

/// Row-major real matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return param(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(p) = data.iter().position(|x| !x.is_finite()) {
            return param(format!("non-finite entry at flat index {p}"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return param("ragged rows");
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`.
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|a| **a != 0.0).count()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Sorted, duplicate-free row and column index sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SupportPair {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl SupportPair {
    /// Sorts and deduplicates the inputs.
    pub fn new(mut rows: Vec<usize>, mut cols: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        Self { rows, cols }
    }

    pub fn full(n: usize, d: usize) -> Self {
        Self { rows: (0..n).collect(), cols: (0..d).collect() }
    }

    pub fn check(&self, n: usize, d: usize) -> Result<()> {
        let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&self.rows) || !sorted(&self.cols) {
            return param("support indices must be sorted and distinct");
        }
        if self.rows.last().is_some_and(|&i| i >= n) || self.cols.last().is_some_and(|&j| j >= d) {
            return param(format!("support index out of range for {n}x{d}"));
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(
            self.rows.iter().chain(&other.rows).copied().collect(),
            self.cols.iter().chain(&other.cols).copied().collect(),
        )
    }
}

/// Sparse vector as parallel sorted index/value lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct SparseVec {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseVec {
    pub fn new(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut p: Vec<(usize, f64)> = pairs.into_iter().collect();
        p.sort_by_key(|x| x.0);
        let (idx, val) = p.into_iter().unzip();
        Self { idx, val }
    }

    /// Keeps the nonzero entries of a dense vector.
    pub fn from_dense(v: &[f64]) -> Self {
        Self::new(v.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, x)| (i, *x)))
    }

    pub fn unit(i: usize) -> Self {
        Self { idx: vec![i], val: vec![1.0] }
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.val)
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            out[i] = v;
        }
        out
    }

    pub fn dot_dense(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&i, &v)| v * x[i]).sum()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        let (mut a, mut b, mut s) = (0, 0, 0.0);
        while a < self.idx.len() && b < other.idx.len() {
            match self.idx[a].cmp(&other.idx[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    s += self.val[a] * other.val[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        s
    }

    pub fn disjoint(&self, other: &Self) -> bool {
        self.idx.iter().all(|i| other.idx.binary_search(i).is_err())
    }
}

/// One rank-1 term `tau · x yᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub tau: f64,
    pub x: SparseVec,
    pub y: SparseVec,
}

/// `Σ τ_i x_i y_iᵀ` with at most `k` terms and `s`-sparse unit factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseRankKFactor {
    pub components: Vec<Component>,
    pub s: usize,
    pub k: usize,
}

pub const UNIT_TOL: f64 = 1e-10;
pub const DEFAULT_TAU_MAX: f64 = 1e6;

impl SparseRankKFactor {
    pub fn empty(s: usize, k: usize) -> Self {
        Self { components: Vec::new(), s, k }
    }

    pub fn validate(&self, n: usize, d: usize, tau_max: f64) -> Result<()> {
        if self.components.len() > self.k {
            return param(format!("{} components exceed k = {}", self.components.len(), self.k));
        }
        for (c, comp) in self.components.iter().enumerate() {
            for (name, v, len) in [("x", &comp.x, n), ("y", &comp.y, d)] {
                if v.nnz() > self.s {
                    return param(format!("component {c}: {name} has {} > s nonzeros", v.nnz()));
                }
                if v.idx.iter().any(|&i| i >= len) {
                    return param(format!("component {c}: {name} index out of range"));
                }
                if (v.norm() - 1.0).abs() > UNIT_TOL {
                    return param(format!("component {c}: {name} is not unit norm"));
                }
            }
            if !comp.tau.is_finite() || comp.tau.abs() > tau_max {
                return param(format!("component {c}: |tau| exceeds tau_max"));
            }
        }
        Ok(())
    }

    /// Pairwise-disjoint row supports and pairwise-disjoint column supports.
    pub fn is_disjoint(&self) -> bool {
        let c = &self.components;
        (0..c.len()).all(|a| {
            (a + 1..c.len()).all(|b| c[a].x.disjoint(&c[b].x) && c[a].y.disjoint(&c[b].y))
        })
    }

    pub fn support(&self) -> SupportPair {
        SupportPair::new(
            self.components.iter().flat_map(|c| c.x.idx.iter().copied()).collect(),
            self.components.iter().flat_map(|c| c.y.idx.iter().copied()).collect(),
        )
    }
}

/// Dense `Σ τ_i x_i y_iᵀ`.
pub fn materialize(f: &SparseRankKFactor, n: usize, d: usize) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::zeros(n, d);
    for c in &f.components {
        if c.x.idx.iter().any(|&i| i >= n) || c.y.idx.iter().any(|&j| j >= d) {
            return Err(SlraError::Parameter("factor support out of range".into()));
        }
        for (&i, &xv) in c.x.idx.iter().zip(&c.x.val) {
            for (&j, &yv) in c.y.idx.iter().zip(&c.y.val) {
                m.add_at(i, j, c.tau * xv * yv);
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(tau: f64, x: SparseVec, y: SparseVec) -> Component {
        Component { tau, x, y }
    }

    #[test]
    fn materialize_single() {
        let f = SparseRankKFactor {
            components: vec![comp(2.0, SparseVec::unit(0), SparseVec::unit(1))],
            s: 1,
            k: 1,
        };
        let m = materialize(&f, 2, 2).unwrap();
        assert_eq!(m.data(), &[0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn materialize_empty_is_zero() {
        let m = materialize(&SparseRankKFactor::empty(1, 1), 3, 2).unwrap();
        assert_eq!(m, DenseMatrix::zeros(3, 2));
    }

    #[test]
    fn disjoint_components_pythagorean() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = SparseRankKFactor {
            components: vec![
                comp(3.0, SparseVec::new([(0, h), (1, h)]), SparseVec::unit(0)),
                comp(-4.0, SparseVec::unit(2), SparseVec::new([(1, h), (2, -h)])),
            ],
            s: 2,
            k: 2,
        };
        assert!(f.is_disjoint());
        f.validate(3, 3, DEFAULT_TAU_MAX).unwrap();
        let m = materialize(&f, 3, 3).unwrap();
        assert!((m.frobenius_sq() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn validate_catches_bad_factor() {
        let f = SparseRankKFactor {
            components: vec![comp(1.0, SparseVec::new([(0, 1.0), (1, 1.0)]), SparseVec::unit(0))],
            s: 2,
            k: 1,
        };
        assert!(f.validate(2, 2, 10.0).is_err());
        let g = SparseRankKFactor {
            components: vec![comp(20.0, SparseVec::unit(0), SparseVec::unit(0))],
            s: 1,
            k: 1,
        };
        assert!(g.validate(2, 2, 10.0).is_err());
    }

    #[test]
    fn matvec_transpose_agree() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(a.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(a.matvec_t(&[1.0, 1.0]), a.transpose().matvec(&[1.0, 1.0]));
    }

    #[test]
    fn support_check() {
        assert!(SupportPair::new(vec![2, 0, 2], vec![1]).check(3, 2).is_ok());
        assert!(SupportPair { rows: vec![1, 0], cols: vec![] }.check(3, 3).is_err());
        assert!(SupportPair::new(vec![3], vec![]).check(3, 3).is_err());
    }
}
