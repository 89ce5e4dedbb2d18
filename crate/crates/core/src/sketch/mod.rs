//! Linear sketches of turnstile streams.
//!
//! Accumulators are fixed-point integers, so sharded ingestion merged in any
//! order reproduces the sequential state bit for bit.

mod amm;
mod countsketch;
mod gaussian;
mod hash;
mod ledger;
mod rows;
mod table;

pub use amm::{cs_amm_check, TwoSidedSketch};
pub use countsketch::{CountSketch, CountSketchConfig};
pub use gaussian::GaussianSketch;
pub use hash::SignedHash;
pub use ledger::MeasurementLedger;
pub use rows::{RowNormSketch, RowSketch};
pub use table::{dequantize, quantize, FRAC_BITS};

use serde::{Deserialize, Serialize};

/// Entrywise additive update `A[row, col] += delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamUpdate {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
}

impl StreamUpdate {
    pub fn new(row: usize, col: usize, delta: f64) -> Self {
        Self { row, col, delta }
    }

    pub fn check(&self, n: usize, d: usize) -> crate::Result<()> {
        if self.row >= n || self.col >= d {
            return crate::error::param(format!("update ({}, {}) outside {n}x{d}", self.row, self.col));
        }
        if !self.delta.is_finite() {
            return crate::error::param("non-finite update");
        }
        Ok(())
    }

    /// Row-major flattened index.
    pub fn flat(&self, d: usize) -> u64 {
        (self.row * d + self.col) as u64
    }
}

/// Nonzero entries of `a` as a row-major update stream.
pub fn stream_of(a: &crate::DenseMatrix) -> Vec<StreamUpdate> {
    let d = a.cols();
    a.data()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(t, &v)| StreamUpdate::new(t / d, t % d, v))
        .collect()
}

/// Odd rep count `⌈8 ln(1/δ)⌉`, the rule used throughout.
pub fn reps_for(delta: f64) -> usize {
    let r = (8.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize;
    r | 1
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
