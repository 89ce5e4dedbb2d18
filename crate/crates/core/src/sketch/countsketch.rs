use serde::{Deserialize, Serialize};

use super::hash::SignedHash;
use super::table::{dequantize, quantize, Table};
use super::{median, MeasurementLedger};
use crate::error::{param, Result, SlraError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSketchConfig {
    pub domain: u64,
    pub buckets: u64,
    /// Always odd; even requests are rounded up.
    pub reps: usize,
    pub seed: u64,
}

impl CountSketchConfig {
    pub fn new(domain: u64, buckets: u64, reps: usize, seed: u64) -> Result<Self> {
        if buckets == 0 || reps == 0 {
            return param("CountSketch needs buckets ≥ 1 and reps ≥ 1");
        }
        Ok(Self { domain, buckets, reps: reps | 1, seed })
    }

    pub fn measurements(&self) -> u64 {
        self.buckets.saturating_mul(self.reps as u64)
    }
}

/// CountSketch of a vector indexed by `0..domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSketch {
    cfg: CountSketchConfig,
    hashes: Vec<SignedHash>,
    table: Table,
}

impl CountSketch {
    pub fn new(cfg: CountSketchConfig) -> Self {
        let hashes = (0..cfg.reps).map(|j| SignedHash::new(cfg.seed, j, cfg.buckets)).collect();
        Self { cfg, hashes, table: Table::new(cfg.reps, cfg.buckets, 1) }
    }

    /// Creates the sketch and records its rows under `name`.
    pub fn registered(cfg: CountSketchConfig, ledger: &mut MeasurementLedger, name: &str) -> Self {
        ledger.register(name, cfg.measurements());
        Self::new(cfg)
    }

    pub fn config(&self) -> &CountSketchConfig {
        &self.cfg
    }

    pub fn update(&mut self, idx: u64, delta: f64) {
        let q = quantize(delta);
        for (j, h) in self.hashes.iter().enumerate() {
            let v = if h.negative(idx) { -q } else { q };
            self.table.add(j, h.bucket(idx), 0, v);
        }
    }

    pub fn merge(&mut self, other: &CountSketch) -> Result<()> {
        if self.cfg != other.cfg {
            return Err(SlraError::Merge(format!("{:?} vs {:?}", self.cfg, other.cfg)));
        }
        self.table.merge(&other.table);
        Ok(())
    }

    /// Median over reps of the signed bucket value.
    pub fn recover(&self, idx: u64) -> f64 {
        let mut est: Vec<f64> = self
            .hashes
            .iter()
            .enumerate()
            .map(|(j, h)| h.sign(idx) * dequantize(self.table.get(j, h.bucket(idx), 0)))
            .collect();
        median(&mut est)
    }

    pub fn recover_all(&self) -> Vec<f64> {
        (0..self.cfg.domain).map(|i| self.recover(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_zero()
    }
}
