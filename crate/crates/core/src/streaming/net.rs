use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::context::{Sketches, StreamContext};
use crate::budget;
use crate::error::{Result, SlraError};
use crate::matrix::SparseRankKFactor;
use crate::nets::{ssk_net_with_budget, NetSpec, NetStructure};

/// Columns of `G` are cached when `m·n·d` stays below this.
const CACHE_LIMIT: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetRecovery {
    pub factor: SparseRankKFactor,
    /// `‖G vec(A) − G vec(X)‖² / m` at the chosen net point.
    pub sketched_cost: f64,
    pub enumerated: u64,
}

/// Nonzero entries of `Σ τ x yᵀ`, flattened row-major.
fn factor_entries(f: &SparseRankKFactor, d: usize) -> Vec<(u64, f64)> {
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for c in &f.components {
        for (&i, &xi) in c.x.idx.iter().zip(&c.x.val) {
            for (&j, &yj) in c.y.idx.iter().zip(&c.y.val) {
                *acc.entry((i * d + j) as u64).or_insert(0.0) += c.tau * xi * yj;
            }
        }
    }
    acc.into_iter().filter(|&(_, v)| v != 0.0).collect()
}

impl StreamContext {
    /// Net point minimizing the sketched distance to `A`.
    pub fn net_recover(&self) -> Result<NetRecovery> {
        self.net_recover_with_budget(budget::enumeration_budget())
    }

    pub fn net_recover_with_budget(&self, budget: u64) -> Result<NetRecovery> {
        self.require_final()?;
        let Sketches::Net { g } = &self.sketches else {
            return Err(SlraError::State("net_recover needs a net context".into()));
        };
        let spec = NetSpec {
            n: self.n,
            d: self.d,
            s: self.s,
            k: self.k,
            eps: self.eps,
            tau_max: self.config.net_tau_max,
            structure: NetStructure::Ssk,
        };
        let target = g.values();
        let m = g.m();
        let nd = self.n * self.d;
        let cache: Option<Vec<f64>> = (m * nd <= CACHE_LIMIT).then(|| {
            let mut c = vec![0.0; m * nd];
            for idx in 0..nd {
                for r in 0..m {
                    c[idx * m + r] = g.entry(r, idx as u64);
                }
            }
            c
        });

        let mut best: Option<(f64, SparseRankKFactor)> = None;
        let mut enumerated = 0u64;
        let mut buf = vec![0.0; m];
        for f in ssk_net_with_budget(&spec, budget)? {
            enumerated += 1;
            let entries = factor_entries(&f, self.d);
            match &cache {
                Some(c) => {
                    buf.iter_mut().for_each(|b| *b = 0.0);
                    for &(idx, x) in &entries {
                        let col = &c[idx as usize * m..(idx as usize + 1) * m];
                        buf.iter_mut().zip(col).for_each(|(b, g)| *b += x * g);
                    }
                }
                None => buf = g.sketch_of(&entries),
            }
            let dist: f64 = target.iter().zip(&buf).map(|(t, b)| (t - b) * (t - b)).sum::<f64>() / m as f64;
            if best.as_ref().is_none_or(|(b, _)| dist < *b) {
                best = Some((dist, f));
            }
        }
        let (sketched_cost, factor) = best.unwrap_or_else(|| (g.norm_estimate().powi(2), SparseRankKFactor::empty(self.s, self.k)));
        Ok(NetRecovery { factor, sketched_cost, enumerated })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{materialize, DenseMatrix};
    use crate::sketch::stream_of;
    use crate::streaming::Algo;

    #[test]
    fn recovers_single_spike() {
        let mut a = DenseMatrix::zeros(5, 5);
        a.set(1, 3, 2.0);
        let mut ctx = StreamContext::new(Algo::Net, 5, 5, 1, 1, 0.5, 7).unwrap();
        ctx.ingest_all(&stream_of(&a)).unwrap();
        assert!(ctx.net_recover().is_err());
        ctx.finalize();
        let r = ctx.net_recover().unwrap();
        let b = materialize(&r.factor, 5, 5).unwrap();
        assert!(a.sub(&b).frobenius_sq() < 1e-9, "{:?}", r.factor);
        assert!(r.sketched_cost < 1e-9);
    }

    #[test]
    fn budget_and_wrong_algo() {
        let mut ctx = StreamContext::new(Algo::Net, 8, 8, 1, 1, 0.5, 0).unwrap();
        ctx.finalize();
        assert!(matches!(ctx.net_recover_with_budget(10), Err(SlraError::OracleInfeasible { .. })));
        let mut rel = StreamContext::new(Algo::Rel, 4, 4, 1, 1, 0.5, 0).unwrap();
        rel.finalize();
        assert!(rel.net_recover().is_err());
    }
}
