use super::hash::SignedHash;
use super::table::{dequantize, quantize, Table};
use super::MeasurementLedger;
use crate::error::{Result, SlraError};
use crate::matrix::DenseMatrix;

/// `‖A SᵀS Bᵀ − A Bᵀ‖_F` for a single-rep CountSketch `S` with `r` buckets
/// acting on the shared inner dimension.
pub fn cs_amm_check(a: &DenseMatrix, b: &DenseMatrix, r: usize, seed: u64) -> Result<f64> {
    if a.cols() != b.cols() {
        return crate::error::param("inner dimensions differ");
    }
    let h = SignedHash::new(seed, 0, r as u64);
    let sketch = |m: &DenseMatrix| {
        let mut out = DenseMatrix::zeros(m.rows(), r);
        for i in 0..m.rows() {
            for (c, &v) in m.row(i).iter().enumerate() {
                out.add_at(i, h.bucket(c as u64) as usize, h.sign(c as u64) * v);
            }
        }
        out
    };
    let approx = sketch(a).matmul(&sketch(b).transpose());
    let exact = a.matmul(&b.transpose());
    Ok(approx.sub(&exact).frobenius_norm())
}

/// `T⁽ʲ⁾ A Rᵀ` for `reps` row CountSketches `T⁽ʲ⁾` and one column CountSketch `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSidedSketch {
    t: Vec<SignedHash>,
    r: SignedHash,
    r_buckets: usize,
    t_buckets: u64,
    table: Table,
}

impl TwoSidedSketch {
    pub fn new(t_buckets: u64, reps: usize, r_buckets: usize, seed: u64) -> Self {
        let reps = reps.max(1) | 1;
        let t = (0..reps).map(|j| SignedHash::new(crate::rng::derive(seed, 1), j, t_buckets)).collect();
        let r = SignedHash::new(crate::rng::derive(seed, 2), 0, r_buckets as u64);
        Self { t, r, r_buckets, t_buckets, table: Table::new(reps, t_buckets, r_buckets) }
    }

    pub fn measurements(&self) -> u64 {
        self.t_buckets * self.r_buckets as u64 * self.t.len() as u64
    }

    pub fn register(&self, ledger: &mut MeasurementLedger, name: &str) {
        ledger.register(name, self.measurements());
    }

    pub fn r_buckets(&self) -> usize {
        self.r_buckets
    }

    pub fn update(&mut self, row: usize, col: usize, delta: f64) {
        let c = self.r.bucket(col as u64) as usize;
        let q = quantize(delta * self.r.sign(col as u64));
        for (j, h) in self.t.iter().enumerate() {
            let v = if h.negative(row as u64) { -q } else { q };
            self.table.add(j, h.bucket(row as u64), c, v);
        }
    }

    pub fn merge(&mut self, other: &TwoSidedSketch) -> Result<()> {
        if self.t != other.t || self.r != other.r || !self.table.same_shape(&other.table) {
            return Err(SlraError::Merge("two-sided sketch configuration differs".into()));
        }
        self.table.merge(&other.table);
        Ok(())
    }

    /// `R x` for a dense vector of length `d`.
    pub fn apply_r(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.r_buckets];
        for (c, &v) in x.iter().enumerate() {
            out[self.r.bucket(c as u64) as usize] += self.r.sign(c as u64) * v;
        }
        out
    }

    /// Per-rep signed estimates of `eᵢᵀ A Rᵀ`.
    pub fn rep_estimates(&self, i: usize) -> Vec<Vec<f64>> {
        self.t
            .iter()
            .enumerate()
            .map(|(j, h)| {
                let s = h.sign(i as u64);
                self.table.cell(j, h.bucket(i as u64)).iter().map(|&v| s * dequantize(v)).collect()
            })
            .collect()
    }
}
