use serde::{Deserialize, Serialize};

use crate::error::{param, Result, SlraError};
use crate::rng::{derive, mix, unit};
use crate::sketch::{
    reps_for, CountSketch, CountSketchConfig, GaussianSketch, MeasurementLedger, RowNormSketch, StreamUpdate,
    TwoSidedSketch,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    /// Gaussian sketch and net enumeration.
    Net,
    /// Heavy rows/columns and entrywise CountSketch.
    Rel,
    /// Heavy rows/columns, level-sampled CountSketches and a factorization sketch.
    Add,
}

impl std::str::FromStr for Algo {
    type Err = SlraError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "net" => Ok(Algo::Net),
            "rel" => Ok(Algo::Rel),
            "add" => Ok(Algo::Add),
            other => param(format!("unknown algorithm {other}")),
        }
    }
}

/// Constants hidden inside `O(·)`; defaults are 4 unless the analysis pins them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    /// `m = ⌈c·(sk/ε²)·ln(n/s)⌉` Gaussian rows for `net`.
    pub net_c: f64,
    /// Bound on component weights searched by `net`.
    pub net_tau_max: f64,
    /// Norm sketches run at `ε/(norm_div·sk)`.
    pub rel_norm_div: f64,
    /// Entry CountSketch buckets `⌈c·s²k²/ε⁴⌉`.
    pub rel_entry_c: f64,
    /// Cap on `|S|`, `|T|` as a multiple of `sk/ε`.
    pub support_cap_c: f64,
    pub add_norm_div: f64,
    /// Rows kept when the norm estimate is at least `add_select_c·√τ`.
    pub add_select_c: f64,
    /// Per-level CountSketch buckets `⌈c·sk²·ln(n/ε)/ε⁶⌉`.
    pub add_level_c: f64,
    /// Row qualifies at level `α` when `ŵ ≥ add_qual_c·α·(ε²/k)·‖Â_ST‖²`.
    pub add_qual_c: f64,
    pub add_amm_c: f64,
    /// Gaussian rows for the `‖A‖_F²` estimate.
    pub f2_rows: usize,
    /// Failure probability used for rep counts.
    pub delta: f64,
    /// Relative accuracy `α` of the row norm estimates.
    pub norm_alpha: f64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            net_c: 4.0,
            net_tau_max: 4.0,
            rel_norm_div: 100.0,
            rel_entry_c: 4.0,
            support_cap_c: 8.0,
            add_norm_div: 16.0,
            add_select_c: 0.45,
            add_level_c: 4.0,
            add_qual_c: 0.25,
            add_amm_c: 4.0,
            f2_rows: 800,
            delta: 0.01,
            norm_alpha: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Sketches {
    Net {
        g: GaussianSketch,
    },
    Rel {
        rows: RowNormSketch,
        cols: RowNormSketch,
        entries: CountSketch,
    },
    Add {
        f2: GaussianSketch,
        rows: RowNormSketch,
        cols: RowNormSketch,
        level_seed: u64,
        levels: Vec<CountSketch>,
        amm: TwoSidedSketch,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamContext {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    pub algo: Algo,
    pub config: StreamConfig,
    pub ledger: MeasurementLedger,
    pub(crate) sketches: Sketches,
    finalized: bool,
}

pub(crate) fn ceil_u64(x: f64) -> u64 {
    x.ceil().max(1.0) as u64
}

impl StreamContext {
    pub fn new(algo: Algo, n: usize, d: usize, s: usize, k: usize, eps: f64, seed: u64) -> Result<Self> {
        Self::with_config(algo, n, d, s, k, eps, seed, StreamConfig::default())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_config(
        algo: Algo,
        n: usize,
        d: usize,
        s: usize,
        k: usize,
        eps: f64,
        seed: u64,
        config: StreamConfig,
    ) -> Result<Self> {
        if n == 0 || d == 0 || s == 0 || k == 0 {
            return param("dimensions, s and k must be positive");
        }
        if s > n.min(d) {
            return param(format!("s = {s} exceeds min(n, d)"));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return param(format!("eps must lie in (0,1), got {eps}"));
        }
        let mut ledger = MeasurementLedger::new();
        let (sf, kf) = (s as f64, k as f64);
        let reps = reps_for(config.delta);
        let sketches = match algo {
            Algo::Net => {
                let m = Self::net_rows(n, s, k, eps, &config);
                Sketches::Net { g: GaussianSketch::registered(m, derive(seed, 10), &mut ledger, "net.gaussian") }
            }
            Algo::Rel => {
                let e = eps / (config.rel_norm_div * sf * kf);
                let rows = RowNormSketch::with_accuracy(n, e, config.norm_alpha, config.delta, derive(seed, 20));
                let cols = RowNormSketch::with_accuracy(d, e, config.norm_alpha, config.delta, derive(seed, 21));
                rows.register(&mut ledger, "rel.row_norms");
                cols.register(&mut ledger, "rel.col_norms");
                let buckets = ceil_u64(config.rel_entry_c * sf * sf * kf * kf / eps.powi(4));
                let cfg = CountSketchConfig::new((n * d) as u64, buckets, reps, derive(seed, 22))?;
                let entries = CountSketch::registered(cfg, &mut ledger, "rel.entries");
                Sketches::Rel { rows, cols, entries }
            }
            Algo::Add => {
                let f2 = GaussianSketch::registered(config.f2_rows, derive(seed, 30), &mut ledger, "add.f2");
                let e = eps / (config.add_norm_div * sf * kf);
                let rows = RowNormSketch::with_accuracy(n, e, config.norm_alpha, config.delta, derive(seed, 31));
                let cols = RowNormSketch::with_accuracy(d, e, config.norm_alpha, config.delta, derive(seed, 32));
                rows.register(&mut ledger, "add.row_norms");
                cols.register(&mut ledger, "add.col_norms");
                let level_count = Self::level_count(n, eps);
                let buckets = ceil_u64(config.add_level_c * sf * kf * kf * (n as f64 / eps).ln() / eps.powi(6));
                let levels = (0..level_count)
                    .map(|l| {
                        let cfg = CountSketchConfig::new((n * d) as u64, buckets, reps, derive(seed, 100 + l as u64))
                            .expect("positive sizes");
                        CountSketch::registered(cfg, &mut ledger, "add.levels")
                    })
                    .collect();
                let t_reps = (config.add_amm_c * (n as f64 * sf * kf / eps).ln()).ceil().max(1.0) as usize | 1;
                let t_buckets = ceil_u64(config.add_amm_c * sf * kf / eps.powi(3));
                let r_buckets = ceil_u64(config.add_amm_c * kf / (eps * eps)) as usize;
                let amm = TwoSidedSketch::new(t_buckets, t_reps, r_buckets, derive(seed, 34));
                amm.register(&mut ledger, "add.amm");
                Sketches::Add { f2, rows, cols, level_seed: derive(seed, 33), levels, amm }
            }
        };
        Ok(Self { n, d, s, k, eps, seed, algo, config, ledger, sketches, finalized: false })
    }

    pub fn net_rows(n: usize, s: usize, k: usize, eps: f64, config: &StreamConfig) -> usize {
        let x = config.net_c * (s * k) as f64 / (eps * eps) * (n as f64 / s as f64).ln();
        x.ceil().max(1.0) as usize
    }

    /// Levels `α = 2^{-l}` for `l = 0..` while `α ≥ ε²/n²`.
    pub fn level_count(n: usize, eps: f64) -> usize {
        let floor = eps * eps / (n * n) as f64;
        let mut l = 0;
        while 0.5f64.powi(l as i32 + 1) >= floor {
            l += 1;
        }
        l + 1
    }

    /// Membership of row `i` in the level-`l` subsample (nested in `l`).
    pub(crate) fn in_level(level_seed: u64, i: usize, l: usize) -> bool {
        unit(mix(level_seed, i as u64)) < 0.5f64.powi(l as i32)
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn ingest(&mut self, u: StreamUpdate) -> Result<()> {
        if self.finalized {
            return Err(SlraError::State("update after finalize".into()));
        }
        u.check(self.n, self.d)?;
        let flat = u.flat(self.d);
        match &mut self.sketches {
            Sketches::Net { g } => g.update(flat, u.delta),
            Sketches::Rel { rows, cols, entries } => {
                rows.update(u.row, u.col, u.delta);
                cols.update(u.col, u.row, u.delta);
                entries.update(flat, u.delta);
            }
            Sketches::Add { f2, rows, cols, level_seed, levels, amm } => {
                f2.update(flat, u.delta);
                rows.update(u.row, u.col, u.delta);
                cols.update(u.col, u.row, u.delta);
                for (l, cs) in levels.iter_mut().enumerate() {
                    if !Self::in_level(*level_seed, u.row, l) {
                        break;
                    }
                    cs.update(flat, u.delta);
                }
                amm.update(u.row, u.col, u.delta);
            }
        }
        Ok(())
    }

    pub fn ingest_all(&mut self, updates: &[StreamUpdate]) -> Result<()> {
        updates.iter().try_for_each(|&u| self.ingest(u))
    }

    pub fn finalize(&mut self) {
        self.finalized = true;
    }

    /// Adds the state of a shard built with identical parameters.
    pub fn merge(&mut self, other: &StreamContext) -> Result<()> {
        if self.finalized {
            return Err(SlraError::State("merge after finalize".into()));
        }
        let same = (self.n, self.d, self.s, self.k, self.seed, self.algo) == (other.n, other.d, other.s, other.k, other.seed, other.algo)
            && self.eps == other.eps
            && self.config == other.config;
        if !same {
            return Err(SlraError::Merge("stream contexts differ in parameters".into()));
        }
        match (&mut self.sketches, &other.sketches) {
            (Sketches::Net { g }, Sketches::Net { g: h }) => g.merge(h),
            (Sketches::Rel { rows, cols, entries }, Sketches::Rel { rows: r2, cols: c2, entries: e2 }) => {
                rows.merge(r2)?;
                cols.merge(c2)?;
                entries.merge(e2)
            }
            (
                Sketches::Add { f2, rows, cols, levels, amm, .. },
                Sketches::Add { f2: f2b, rows: r2, cols: c2, levels: l2, amm: a2, .. },
            ) => {
                f2.merge(f2b)?;
                rows.merge(r2)?;
                cols.merge(c2)?;
                for (a, b) in levels.iter_mut().zip(l2) {
                    a.merge(b)?;
                }
                amm.merge(a2)
            }
            _ => Err(SlraError::Merge("algorithm mismatch".into())),
        }
    }

    pub(crate) fn require_final(&self) -> Result<()> {
        if self.finalized {
            Ok(())
        } else {
            Err(SlraError::State("recovery before finalize".into()))
        }
    }

    /// `‖G vec(A)‖²/m`, available for `net` and `add`.
    pub fn frobenius_sq_estimate(&self) -> Option<f64> {
        match &self.sketches {
            Sketches::Net { g } | Sketches::Add { f2: g, .. } => Some(g.norm_estimate().powi(2)),
            Sketches::Rel { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::rng::{normal_vec, rng};
    use crate::sketch::stream_of;

    #[test]
    fn level_counts() {
        assert_eq!(StreamContext::level_count(48, 0.3), 15);
        assert_eq!(StreamContext::level_count(1, 0.999), 1);
    }

    #[test]
    fn net_ledger_exact() {
        let ctx = StreamContext::new(Algo::Net, 8, 8, 1, 1, 0.5, 0).unwrap();
        assert_eq!(ctx.ledger.total(), 34);
    }

    #[test]
    fn rejects_after_finalize_and_bad_params() {
        let mut ctx = StreamContext::new(Algo::Net, 4, 4, 1, 1, 0.5, 0).unwrap();
        ctx.finalize();
        assert!(matches!(ctx.ingest(StreamUpdate::new(0, 0, 1.0)), Err(SlraError::State(_))));
        assert!(StreamContext::new(Algo::Net, 4, 4, 5, 1, 0.5, 0).is_err());
        assert!(StreamContext::new(Algo::Rel, 4, 4, 1, 1, 1.5, 0).is_err());
        assert!("foo".parse::<Algo>().is_err());
    }

    #[test]
    fn sharded_equals_sequential_all_algos() {
        let a = DenseMatrix::new(10, 9, normal_vec(&mut rng(4), 90)).unwrap();
        let stream = stream_of(&a);
        for algo in [Algo::Net, Algo::Rel, Algo::Add] {
            let mut seq = StreamContext::new(algo, 10, 9, 1, 1, 0.5, 3).unwrap();
            seq.ingest_all(&stream).unwrap();
            let mut s1 = StreamContext::new(algo, 10, 9, 1, 1, 0.5, 3).unwrap();
            let mut s2 = s1.clone();
            for (t, &u) in stream.iter().enumerate() {
                if t % 3 == 0 { s2.ingest(u).unwrap() } else { s1.ingest(u).unwrap() }
            }
            s1.merge(&s2).unwrap();
            assert_eq!(s1, seq, "{algo:?}");
            let other = StreamContext::new(algo, 10, 9, 1, 1, 0.5, 4).unwrap();
            assert!(s1.merge(&other).is_err());
        }
    }
}
