use super::context::{Sketches, StreamContext};
use super::{linear_time_svd, select_heavy, BicriteriaOutput};
use crate::error::{Result, SlraError};
use crate::linalg::svd;
use crate::matrix::DenseMatrix;
use crate::sketch::median;

/// Level index for a row of estimated weight `w` out of `total`, or `None`
/// when it falls below the coarsest level.
fn qualifying_level(w: f64, total: f64, k: usize, eps: f64, qual_c: f64, levels: usize) -> Option<usize> {
    if w <= 0.0 || total <= 0.0 {
        return None;
    }
    let bound = w * k as f64 / (qual_c * eps * eps * total);
    if bound >= 1.0 {
        return Some(0);
    }
    let l = (-bound.log2()).ceil() as usize;
    (l < levels).then_some(l)
}

/// Least-squares coefficients of `y` in the column span of `b`.
fn solve_ls(pinv: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    pinv.matvec(y)
}

fn pseudo_inverse(b: &DenseMatrix) -> DenseMatrix {
    let f = svd(b);
    let top = f.sigma.first().copied().unwrap_or(0.0);
    let (r, m) = (f.v.rows(), f.u.rows());
    DenseMatrix::from_fn(r, m, |i, j| {
        f.sigma
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s > 1e-12 * top)
            .map(|(t, &s)| f.v.get(i, t) * f.u.get(j, t) / s)
            .sum()
    })
}

impl StreamContext {
    /// Bicriteria output with additive error `ε‖A‖_F²`.
    pub fn add_err_recover(&self) -> Result<BicriteriaOutput> {
        self.require_final()?;
        let Sketches::Add { f2, rows, cols, level_seed, levels, amm } = &self.sketches else {
            return Err(SlraError::State("add_err_recover needs an add context".into()));
        };
        let (k, eps, d) = (self.k, self.eps, self.d);
        let f2_hat = f2.norm_estimate().powi(2);
        let zero = BicriteriaOutput { cost_estimate: f2_hat, ..BicriteriaOutput::zero(k) };
        if f2_hat <= 0.0 {
            return Ok(zero);
        }
        let tau = eps / (self.s * k) as f64 * f2_hat;
        let cut = self.config.add_select_c * tau.sqrt();
        let cap = self.support_cap();
        let s_rows = select_heavy(&rows.estimates(), cut, cap);
        let t_cols = select_heavy(&cols.estimates(), cut, cap);
        if s_rows.is_empty() || t_cols.is_empty() {
            return Ok(zero);
        }

        let block_of = |l: usize, i: usize| -> Vec<f64> {
            t_cols.iter().map(|&j| levels[l].recover((i * d + j) as u64)).collect()
        };
        let a_hat = DenseMatrix::from_rows(&s_rows.iter().map(|&i| block_of(0, i)).collect::<Vec<_>>())?;
        let total = a_hat.frobenius_sq();
        if total < eps * f2_hat {
            return Ok(zero);
        }

        let mut sampled = Vec::new();
        let mut probs = Vec::new();
        for (p, &i) in s_rows.iter().enumerate() {
            let w: f64 = a_hat.row(p).iter().map(|x| x * x).sum();
            let Some(l) = qualifying_level(w, total, k, eps, self.config.add_qual_c, levels.len()) else {
                continue;
            };
            if StreamContext::in_level(*level_seed, i, l) {
                sampled.push(if l == 0 { a_hat.row(p).to_vec() } else { block_of(l, i) });
                probs.push(0.5f64.powi(l as i32));
            }
        }
        let v_hat = linear_time_svd(&sampled, &probs, k, t_cols.len())?;
        let r = v_hat.cols();

        // R S_Tᵀ V̂, one column per singular direction.
        let rv_cols: Vec<Vec<f64>> = (0..r)
            .map(|c| {
                let mut full = vec![0.0; d];
                for (q, &j) in t_cols.iter().enumerate() {
                    full[j] = v_hat.get(q, c);
                }
                amm.apply_r(&full)
            })
            .collect();
        let rv = DenseMatrix::from_fn(amm.r_buckets(), r, |i, c| rv_cols[c][i]);
        let pinv = pseudo_inverse(&rv);

        let mut left = DenseMatrix::zeros(s_rows.len(), r);
        for (p, &i) in s_rows.iter().enumerate() {
            let coeffs: Vec<Vec<f64>> = amm.rep_estimates(i).iter().map(|y| solve_ls(&pinv, y)).collect();
            for c in 0..r {
                let mut col: Vec<f64> = coeffs.iter().map(|v| v[c]).collect();
                left.set(p, c, median(&mut col));
            }
        }
        let out = BicriteriaOutput { rows: s_rows, cols: t_cols, left, right: v_hat, cost_estimate: 0.0 };
        let inside = a_hat.sub(&out.block()).frobenius_sq();
        Ok(BicriteriaOutput { cost_estimate: (f2_hat - total).max(0.0) + inside, ..out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::planted_block;
    use crate::sketch::stream_of;
    use crate::streaming::Algo;

    #[test]
    fn levels_for_weights() {
        assert_eq!(qualifying_level(1.0, 1.0, 1, 0.5, 0.25, 10), Some(0));
        // bound = 0.01/(0.25·0.25) = 0.16, so α = 1/8
        assert_eq!(qualifying_level(0.01, 1.0, 1, 0.5, 0.25, 10), Some(3));
        assert_eq!(qualifying_level(1e-9, 1.0, 1, 0.5, 0.25, 3), None);
        assert_eq!(qualifying_level(0.0, 1.0, 1, 0.5, 0.25, 3), None);
    }

    #[test]
    fn pinv_recovers_coefficients() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
        let y = b.matvec(&[0.5, -1.0]);
        let c = solve_ls(&pseudo_inverse(&b), &y);
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn planted_two_blocks() {
        let (a, f) = planted_block(16, 16, 2, &[6.0, 4.0], 0.05, 5);
        let mut ctx = StreamContext::new(Algo::Add, 16, 16, 2, 2, 0.5, 9).unwrap();
        ctx.ingest_all(&stream_of(&a)).unwrap();
        ctx.finalize();
        let out = ctx.add_err_recover().unwrap();
        assert!(out.rank() <= 2);
        let sup = f.support();
        assert!(sup.rows.iter().all(|r| out.rows.contains(r)), "{:?} {:?}", sup.rows, out.rows);
        let cost = a.sub(&out.to_dense(16, 16)).frobenius_sq();
        assert!(cost <= 16.0 * 16.0 * 0.0025 * 1.5 + 0.5 * a.frobenius_sq(), "{cost}");
    }

    #[test]
    fn zero_matrix_gives_zero_output() {
        let mut ctx = StreamContext::new(Algo::Add, 6, 6, 1, 1, 0.5, 0).unwrap();
        ctx.finalize();
        let out = ctx.add_err_recover().unwrap();
        assert!(out.rows.is_empty());
    }
}
