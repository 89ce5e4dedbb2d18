use super::context::{Sketches, StreamContext};
use super::{select_heavy, tail_scale, BicriteriaOutput};
use crate::error::{Result, SlraError};
use crate::linalg::svd_truncated;
use crate::matrix::DenseMatrix;

/// Rows, columns and `S×T` block estimates shared by the two bicriteria algorithms.
pub(crate) struct HeavyBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl StreamContext {
    pub(crate) fn support_cap(&self) -> usize {
        (self.config.support_cap_c * (self.s * self.k) as f64 / self.eps).ceil() as usize
    }

    /// Bicriteria output with relative error: heavy rows and columns from
    /// norm sketches, the block from an entrywise CountSketch, then rank-`k` SVD.
    pub fn rel_err_recover(&self) -> Result<BicriteriaOutput> {
        self.require_final()?;
        let Sketches::Rel { rows, cols, entries } = &self.sketches else {
            return Err(SlraError::State("rel_err_recover needs a rel context".into()));
        };
        let sk = (self.s * self.k) as f64;
        let head = (sk / self.eps).ceil() as usize;
        let ratio = 0.625 * (self.eps / sk).sqrt();
        let cap = self.support_cap();
        let pick = |est: Vec<f64>| {
            let t = tail_scale(&est, head);
            select_heavy(&est, ratio * t, cap)
        };
        let block = HeavyBlock { rows: pick(rows.estimates()), cols: pick(cols.estimates()) };
        let d = self.d;
        let a_hat = DenseMatrix::from_fn(block.rows.len(), block.cols.len(), |p, q| {
            entries.recover((block.rows[p] * d + block.cols[q]) as u64)
        });
        Ok(self.rank_k_output(block, &a_hat))
    }

    fn rank_k_output(&self, block: HeavyBlock, a_hat: &DenseMatrix) -> BicriteriaOutput {
        if block.rows.is_empty() || block.cols.is_empty() {
            return BicriteriaOutput { cost_estimate: a_hat.frobenius_sq(), ..BicriteriaOutput::zero(self.k) };
        }
        let t = svd_truncated(a_hat, self.k.min(block.rows.len()).min(block.cols.len())).expect("rank within shape");
        let left = DenseMatrix::from_fn(t.u.rows(), t.sigma.len(), |i, j| t.u.get(i, j) * t.sigma[j]);
        let out = BicriteriaOutput { rows: block.rows, cols: block.cols, left, right: t.v, cost_estimate: 0.0 };
        let cost = a_hat.sub(&out.block()).frobenius_sq();
        BicriteriaOutput { cost_estimate: cost, ..out }
    }
}

#[cfg(test)]
mod tests {
    use crate::instances::planted_block;
    use crate::sketch::stream_of;
    use crate::streaming::{Algo, StreamContext};

    #[test]
    fn planted_block_found() {
        let (a, f) = planted_block(20, 20, 2, &[6.0], 0.05, 3);
        let mut ctx = StreamContext::new(Algo::Rel, 20, 20, 2, 1, 0.5, 1).unwrap();
        ctx.ingest_all(&stream_of(&a)).unwrap();
        ctx.finalize();
        let out = ctx.rel_err_recover().unwrap();
        let sup = f.support();
        assert!(sup.rows.iter().all(|r| out.rows.contains(r)));
        assert!(sup.cols.iter().all(|c| out.cols.contains(c)));
        assert!(out.rank() <= 1);
        assert!(out.rows.len() <= ctx.support_cap());
        let cost = a.sub(&out.to_dense(20, 20)).frobenius_sq();
        assert!(cost <= 20.0 * 20.0 * 0.05 * 0.05 * 1.5, "{cost}");
    }
}
