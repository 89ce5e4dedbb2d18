use super::table::{dequantize, quantize};
use super::MeasurementLedger;
use crate::error::{Result, SlraError};
use crate::rng::counter_normal;

/// `m` implicit Gaussian rows applied to a flattened vector; row entries are
/// regenerated from `(seed, row, index)` on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSketch {
    m: usize,
    seed: u64,
    acc: Vec<i128>,
}

impl GaussianSketch {
    pub fn new(m: usize, seed: u64) -> Self {
        Self { m, seed, acc: vec![0; m] }
    }

    pub fn registered(m: usize, seed: u64, ledger: &mut MeasurementLedger, name: &str) -> Self {
        ledger.register(name, m as u64);
        Self::new(m, seed)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `a_m`, fixed to `√m`.
    pub fn a_m(&self) -> f64 {
        (self.m as f64).sqrt()
    }

    #[inline]
    pub fn entry(&self, row: usize, idx: u64) -> f64 {
        counter_normal(self.seed, row as u64, idx)
    }

    pub fn update(&mut self, idx: u64, delta: f64) {
        if delta == 0.0 {
            return;
        }
        for (r, a) in self.acc.iter_mut().enumerate() {
            *a += quantize(delta * counter_normal(self.seed, r as u64, idx));
        }
    }

    pub fn apply_dense(&mut self, v: &[f64]) {
        for (i, &x) in v.iter().enumerate() {
            self.update(i as u64, x);
        }
    }

    pub fn merge(&mut self, other: &GaussianSketch) -> Result<()> {
        if self.m != other.m || self.seed != other.seed {
            return Err(SlraError::Merge("gaussian sketch shape or seed differs".into()));
        }
        self.acc.iter_mut().zip(&other.acc).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// `G v` accumulated so far.
    pub fn values(&self) -> Vec<f64> {
        self.acc.iter().map(|&a| dequantize(a)).collect()
    }

    /// `‖G v‖ / a_m`, an estimate of `‖v‖`.
    pub fn norm_estimate(&self) -> f64 {
        crate::matrix::norm2(&self.values()) / self.a_m()
    }

    /// `G w` for a vector given by its sparse entries, without touching the state.
    pub fn sketch_of(&self, entries: &[(u64, f64)]) -> Vec<f64> {
        (0..self.m)
            .map(|r| entries.iter().map(|&(i, x)| x * counter_normal(self.seed, r as u64, i)).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_vec, rng};

    #[test]
    fn zero_is_noop() {
        let mut g = GaussianSketch::new(5, 1);
        g.apply_dense(&[0.0; 10]);
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear() {
        let mut r = rng(4);
        let (u, w) = (normal_vec(&mut r, 20), normal_vec(&mut r, 20));
        let sum: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
        let (mut gu, mut gw, mut gs) = (GaussianSketch::new(30, 2), GaussianSketch::new(30, 2), GaussianSketch::new(30, 2));
        gu.apply_dense(&u);
        gw.apply_dense(&w);
        gs.apply_dense(&sum);
        gu.merge(&gw).unwrap();
        for (a, b) in gu.values().iter().zip(gs.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jl_norm() {
        let v = normal_vec(&mut rng(77), 50);
        let nv = crate::matrix::norm2(&v);
        let mut ok = 0;
        for seed in 0..200 {
            let mut g = GaussianSketch::new(400, seed);
            g.apply_dense(&v);
            let ratio = g.norm_estimate() / nv;
            if (0.8..=1.2).contains(&ratio) {
                ok += 1;
            }
        }
        assert!(ok >= 190, "{ok}");
    }

    #[test]
    fn sketch_of_matches_updates() {
        let mut g = GaussianSketch::new(7, 3);
        g.update(4, 2.0);
        g.update(9, -1.5);
        let direct = g.sketch_of(&[(4, 2.0), (9, -1.5)]);
        for (a, b) in g.values().iter().zip(direct) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
