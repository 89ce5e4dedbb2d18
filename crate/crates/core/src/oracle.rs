//! Brute-force sparse LRA, used as ground truth on tiny instances.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::budget::{self, binomial};
use crate::error::{param, Result};
use crate::linalg::{extract, singular_values, svd_truncated};
use crate::matrix::{Component, DenseMatrix, SparseRankKFactor, SparseVec};
use crate::nets::{ssk_net_with_budget, NetSpec, NetStructure};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleVariant {
    /// Rank-k approximation supported on a single `s×s` block.
    Submatrix,
    /// `k` rank-1 components on pairwise-disjoint `s×s` blocks.
    PerComponent,
    /// Best point of the `S_{s,k}` net at resolution `eps`.
    General { eps: f64, tau_max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub factor: SparseRankKFactor,
    /// `‖A − B‖_F²`.
    pub cost: f64,
    /// Net resolution for the general variant, `None` when exact.
    pub resolution: Option<f64>,
    pub enumerated: f64,
}

pub fn brute_force_sparse_lra(a: &DenseMatrix, s: usize, k: usize, variant: OracleVariant) -> Result<OracleResult> {
    brute_force_with_budget(a, s, k, variant, budget::enumeration_budget())
}

pub fn brute_force_with_budget(
    a: &DenseMatrix,
    s: usize,
    k: usize,
    variant: OracleVariant,
    budget: u64,
) -> Result<OracleResult> {
    let (n, d) = (a.rows(), a.cols());
    if s == 0 || k == 0 || s > n.min(d) {
        return param(format!("oracle needs 1 ≤ s ≤ min(n,d) and k ≥ 1, got s={s}, k={k}"));
    }
    match variant {
        OracleVariant::Submatrix => submatrix(a, s, k, budget),
        OracleVariant::PerComponent => per_component(a, s, k, budget),
        OracleVariant::General { eps, tau_max } => general(a, s, k, eps, tau_max, budget),
    }
}

/// Top-`k` squared singular value mass of a block.
fn block_energy(block: &DenseMatrix, k: usize) -> f64 {
    let f = block.frobenius_sq();
    let r = block.rows().min(block.cols());
    if k >= r {
        return f;
    }
    match (r, block.rows(), block.cols()) {
        (1, _, _) => f,
        (2, 2, 2) => {
            let m = block.data();
            let det = m[0] * m[3] - m[1] * m[2];
            0.5 * (f + (f * f - 4.0 * det * det).max(0.0).sqrt())
        }
        _ => singular_values(block).iter().take(k).map(|x| x * x).sum(),
    }
}

fn block_factor(a: &DenseMatrix, rows: &[usize], cols: &[usize], k: usize) -> Vec<Component> {
    let block = extract(a, rows, cols);
    let r = k.min(rows.len()).min(cols.len());
    let svd = svd_truncated(&block, r).expect("rank within block");
    (0..r)
        .filter(|&i| svd.sigma[i] > 0.0)
        .map(|i| Component {
            tau: svd.sigma[i],
            x: SparseVec::new(rows.iter().enumerate().map(|(p, &row)| (row, svd.u.get(p, i)))),
            y: SparseVec::new(cols.iter().enumerate().map(|(p, &col)| (col, svd.v.get(p, i)))),
        })
        .collect()
}

fn submatrix(a: &DenseMatrix, s: usize, k: usize, budget: u64) -> Result<OracleResult> {
    let count = binomial(a.rows(), s) * binomial(a.cols(), s);
    budget::check(count, budget)?;
    let col_sets: Vec<Vec<usize>> = (0..a.cols()).combinations(s).collect();
    let mut best = (-1.0, Vec::new(), Vec::new());
    for rows in (0..a.rows()).combinations(s) {
        for cols in &col_sets {
            let e = block_energy(&extract(a, &rows, cols), k);
            if e > best.0 {
                best = (e, rows.clone(), cols.clone());
            }
        }
    }
    let components = block_factor(a, &best.1, &best.2, k);
    let factor = SparseRankKFactor { components, s, k };
    let cost = residual(a, &factor);
    Ok(OracleResult { factor, cost, resolution: None, enumerated: count })
}

fn per_component(a: &DenseMatrix, s: usize, k: usize, budget: u64) -> Result<OracleResult> {
    let count = binomial(a.rows(), s) * binomial(a.cols(), s);
    budget::check(count, budget)?;
    let row_sets: Vec<Vec<usize>> = (0..a.rows()).combinations(s).collect();
    let col_sets: Vec<Vec<usize>> = (0..a.cols()).combinations(s).collect();
    let nc = col_sets.len();
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(row_sets.len() * nc);
    for (ri, rows) in row_sets.iter().enumerate() {
        for (ci, cols) in col_sets.iter().enumerate() {
            let e = block_energy(&extract(a, rows, cols), 1);
            if e > 0.0 {
                blocks.push((e, ri * nc + ci));
            }
        }
    }
    blocks.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let overlaps = |x: usize, y: usize| {
        let (rx, cx) = (&row_sets[x / nc], &col_sets[x % nc]);
        let (ry, cy) = (&row_sets[y / nc], &col_sets[y % nc]);
        rx.iter().any(|i| ry.contains(i)) || cx.iter().any(|j| cy.contains(j))
    };

    struct Search<'a, F: Fn(usize, usize) -> bool> {
        blocks: &'a [(f64, usize)],
        overlaps: F,
        k: usize,
        chosen: Vec<usize>,
        best: (f64, Vec<usize>),
    }
    impl<F: Fn(usize, usize) -> bool> Search<'_, F> {
        fn run(&mut self, from: usize, value: f64) {
            if value > self.best.0 {
                self.best = (value, self.chosen.clone());
            }
            if self.chosen.len() == self.k {
                return;
            }
            let left = (self.k - self.chosen.len()) as f64;
            for i in from..self.blocks.len() {
                let (e, id) = self.blocks[i];
                if value + left * e <= self.best.0 {
                    break;
                }
                if self.chosen.iter().any(|&c| (self.overlaps)(c, id)) {
                    continue;
                }
                self.chosen.push(id);
                self.run(i + 1, value + e);
                self.chosen.pop();
            }
        }
    }
    let mut search = Search { blocks: &blocks, overlaps, k, chosen: Vec::new(), best: (0.0, Vec::new()) };
    search.run(0, 0.0);

    let components = search
        .best
        .1
        .iter()
        .flat_map(|&id| block_factor(a, &row_sets[id / nc], &col_sets[id % nc], 1))
        .collect();
    let factor = SparseRankKFactor { components, s, k };
    let cost = residual(a, &factor);
    Ok(OracleResult { factor, cost, resolution: None, enumerated: count })
}

fn general(a: &DenseMatrix, s: usize, k: usize, eps: f64, tau_max: f64, budget: u64) -> Result<OracleResult> {
    let spec = NetSpec { n: a.rows(), d: a.cols(), s, k, eps, tau_max, structure: NetStructure::Ssk };
    let a2 = a.frobenius_sq();
    let mut best: Option<(f64, SparseRankKFactor)> = None;
    let mut enumerated = 0.0;
    for f in ssk_net_with_budget(&spec, budget)? {
        enumerated += 1.0;
        let c = a2 - 2.0 * inner(a, &f) + gram(&f);
        if best.as_ref().map_or(true, |(b, _)| c < *b) {
            best = Some((c, f));
        }
    }
    let (_, factor) = best.expect("net contains the zero factor");
    let cost = residual(a, &factor);
    Ok(OracleResult { factor, cost, resolution: Some(eps), enumerated })
}

/// `⟨A, B⟩` for a factored `B`.
pub fn inner(a: &DenseMatrix, f: &SparseRankKFactor) -> f64 {
    f.components
        .iter()
        .map(|c| {
            let mut acc = 0.0;
            for (&i, &xi) in c.x.idx.iter().zip(&c.x.val) {
                acc += xi * c.y.dot_dense(a.row(i));
            }
            c.tau * acc
        })
        .sum()
}

/// `‖B‖_F²` for a factored `B`.
pub fn gram(f: &SparseRankKFactor) -> f64 {
    let cs = &f.components;
    let mut acc = 0.0;
    for p in cs {
        for q in cs {
            acc += p.tau * q.tau * p.x.dot(&q.x) * p.y.dot(&q.y);
        }
    }
    acc
}

/// `‖A − B‖_F²`, clamped at zero.
pub fn residual(a: &DenseMatrix, f: &SparseRankKFactor) -> f64 {
    (a.frobenius_sq() - 2.0 * inner(a, f) + gram(f)).max(0.0)
}
