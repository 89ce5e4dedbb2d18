use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::budget;
use crate::error::{param, Result};
use crate::matrix::{dot, norm2, Component, DenseMatrix, SparseRankKFactor, SparseVec};
use crate::nets::{ssk_net_with_budget, NetSpec, NetStructure};
use crate::rng::{derive, normal_vec, rng};
use crate::sketch::{GaussianSketch, MeasurementLedger};

/// Largest `m·n²` the explicit backend will materialize.
const EXPLICIT_LIMIT: f64 = 2e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateBackend {
    /// Regenerates `S` and forms `SᵀS vec(A)` directly.
    Explicit,
    /// Draws `SᵀS vec(A)` from its exact law: `χ²_m·v + ‖v‖·√χ²_m·P⊥z`.
    Simulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub factor: SparseRankKFactor,
    /// `⟨S vec(A), S vec(X′)⟩ / m` at the returned `X′`.
    pub score: f64,
    pub m: usize,
    pub backend: EstimateBackend,
    pub ledger: MeasurementLedger,
}

/// `√(2s ln(3en/(εs))) ≤ ε²√n`.
pub fn hypothesis_holds(n: usize, s: usize, eps: f64) -> bool {
    let (nf, sf) = (n as f64, s as f64);
    (2.0 * sf * (3.0 * std::f64::consts::E * nf / (eps * sf)).ln()).sqrt() <= eps * eps * nf.sqrt()
}

/// Smallest `n ≥ start` for which [`hypothesis_holds`].
pub fn min_n_for_hypothesis(s: usize, eps: f64, start: usize) -> usize {
    (start.max(s)..).find(|&n| hypothesis_holds(n, s, eps)).expect("holds for large n")
}

/// `⌈c·(nsk/ε⁴)·ln(n/(εs))⌉`.
pub fn measurement_count(n: usize, s: usize, k: usize, eps: f64, c: f64) -> usize {
    let x = c * (n * s * k) as f64 / eps.powi(4) * (n as f64 / (eps * s as f64)).ln().max(1.0);
    x.ceil() as usize
}

/// `SᵀS vec(A) / m`, reshaped as a matrix.
fn back_projection(a: &DenseMatrix, m: usize, seed: u64, backend: EstimateBackend) -> Result<DenseMatrix> {
    let v = a.data();
    let big_n = v.len();
    let out = match backend {
        EstimateBackend::Explicit => {
            if m as f64 * big_n as f64 > EXPLICIT_LIMIT {
                return param(format!("explicit backend limited to m·n² ≤ {EXPLICIT_LIMIT:e}; use the simulated backend"));
            }
            let mut g = GaussianSketch::new(m, seed);
            g.apply_dense(v);
            let y = g.values();
            (0..big_n).map(|idx| (0..m).map(|r| y[r] * g.entry(r, idx as u64)).sum::<f64>() / m as f64).collect()
        }
        EstimateBackend::Simulated => {
            let mut r = rng(seed);
            let c1 = ChiSquared::new(m as f64).expect("m ≥ 1").sample(&mut r);
            let nv = norm2(v);
            let mut z = normal_vec(&mut r, big_n);
            if nv > 0.0 {
                let proj = dot(&z, v) / (nv * nv);
                z.iter_mut().zip(v).for_each(|(zi, vi)| *zi -= proj * vi);
            }
            v.iter().zip(&z).map(|(vi, zi)| (c1 * vi + nv * c1.sqrt() * zi) / m as f64).collect()
        }
    };
    DenseMatrix::new(a.rows(), a.cols(), out)
}

fn top_pair_2x2(p: f64, q: f64, r: f64, s: f64) -> (f64, [f64; 2], [f64; 2]) {
    let b = DenseMatrix::from_rows(&[vec![p, q], vec![r, s]]).expect("finite");
    let f = crate::linalg::svd(&b);
    (f.sigma[0], [f.u.get(0, 0), f.u.get(1, 0)], [f.v.get(0, 0), f.v.get(1, 0)])
}

fn sigma_2x2(p: f64, q: f64, r: f64, s: f64) -> f64 {
    let f = p * p + q * q + r * r + s * s;
    let det = p * s - q * r;
    (0.5 * (f + (f * f - 4.0 * det * det).max(0.0).sqrt())).sqrt()
}

/// Exact maximizer of `⟨M, xyᵀ⟩` over unit 2-sparse `x`, `y`, by
/// branch-and-bound over 2×2 blocks anchored at their largest entry.
fn best_2x2(mm: &DenseMatrix) -> ([usize; 2], [usize; 2]) {
    let (n, d) = (mm.rows(), mm.cols());
    let mut order: Vec<usize> = (0..n * d).collect();
    let data = mm.data();
    order.sort_by(|&x, &y| data[y].abs().total_cmp(&data[x].abs()).then(x.cmp(&y)));
    let colmax2: Vec<f64> = (0..d).map(|j| (0..n).map(|i| mm.get(i, j).powi(2)).fold(0.0, f64::max)).collect();
    let mut best = (f64::NEG_INFINITY, [0, 1], [0, 1]);
    for &t in &order {
        let (i, j) = (t / d, t % d);
        let a = data[t].abs();
        if 2.0 * a < best.0 {
            break;
        }
        let a2 = a * a;
        for j2 in (0..d).filter(|&x| x != j) {
            let ub = a2 + mm.get(i, j2).powi(2) + colmax2[j].min(a2) + colmax2[j2].min(a2);
            if ub.sqrt() < best.0 {
                continue;
            }
            for i2 in (0..n).filter(|&x| x != i) {
                let sg = sigma_2x2(mm.get(i, j), mm.get(i, j2), mm.get(i2, j), mm.get(i2, j2));
                if sg > best.0 {
                    best = (sg, [i, i2], [j, j2]);
                }
            }
        }
    }
    let (mut r, mut c) = (best.1, best.2);
    r.sort_unstable();
    c.sort_unstable();
    (r, c)
}

fn score(mm: &DenseMatrix, f: &SparseRankKFactor) -> f64 {
    f.components
        .iter()
        .map(|c| {
            let mut acc = 0.0;
            for (&i, &x) in c.x.idx.iter().zip(&c.x.val) {
                for (&j, &y) in c.y.idx.iter().zip(&c.y.val) {
                    acc += x * y * mm.get(i, j);
                }
            }
            c.tau * acc
        })
        .sum()
}

/// `X′` of operator norm 1 maximizing the sketched inner product with `A`.
/// For `s ≤ 2` the maximum over the continuous set is found exactly; larger
/// `s` enumerates the constructive net at resolution `eps`.
pub fn estimate_signal(
    a: &DenseMatrix,
    s: usize,
    k: usize,
    eps: f64,
    seed: u64,
    backend: EstimateBackend,
    c: f64,
) -> Result<Estimate> {
    let n = a.rows();
    if k != 1 {
        return param("estimation is implemented for k = 1");
    }
    if s == 0 || s > n.min(a.cols()) || !(eps > 0.0 && eps < 1.0) {
        return param("estimate_signal needs 1 ≤ s ≤ n and eps in (0,1)");
    }
    let m = measurement_count(n, s, k, eps, c);
    let mut ledger = MeasurementLedger::new();
    ledger.register("estimate.gaussian", m as u64);
    let mm = back_projection(a, m, derive(seed, 1), backend)?;

    let factor = match s {
        1 => {
            let data = mm.data();
            let t = (0..data.len()).max_by(|&x, &y| data[x].abs().total_cmp(&data[y].abs()).then(y.cmp(&x))).unwrap();
            let sign = if data[t] < 0.0 { -1.0 } else { 1.0 };
            let comp = Component { tau: 1.0, x: SparseVec::new([(t / a.cols(), sign)]), y: SparseVec::unit(t % a.cols()) };
            SparseRankKFactor { components: vec![comp], s, k }
        }
        2 => {
            let (r, cl) = best_2x2(&mm);
            let (_, u, v) = top_pair_2x2(mm.get(r[0], cl[0]), mm.get(r[0], cl[1]), mm.get(r[1], cl[0]), mm.get(r[1], cl[1]));
            let comp = Component {
                tau: 1.0,
                x: SparseVec::new([(r[0], u[0]), (r[1], u[1])]),
                y: SparseVec::new([(cl[0], v[0]), (cl[1], v[1])]),
            };
            SparseRankKFactor { components: vec![comp], s, k }
        }
        _ => {
            let spec = NetSpec { n, d: a.cols(), s, k, eps, tau_max: 1.0, structure: NetStructure::Ssk };
            let mut best: Option<(f64, SparseRankKFactor)> = None;
            for f in ssk_net_with_budget(&spec, budget::enumeration_budget())? {
                if f.components.first().is_none_or(|c| c.tau.abs() != 1.0) {
                    continue;
                }
                let sc = score(&mm, &f);
                if best.as_ref().is_none_or(|(b, _)| sc > *b) {
                    best = Some((sc, f));
                }
            }
            best.map(|b| b.1).unwrap_or_else(|| SparseRankKFactor::empty(s, k))
        }
    };
    Ok(Estimate { score: score(&mm, &factor), factor, m, backend, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::gen_planted;
    use crate::linalg::{extract, singular_values};
    use crate::matrix::materialize;

    #[test]
    fn hypothesis_threshold() {
        assert!(!hypothesis_holds(64, 2, 0.5));
        let n = min_n_for_hypothesis(2, 0.5, 64);
        assert!(hypothesis_holds(n, 2, 0.5) && !hypothesis_holds(n - 1, 2, 0.5));
    }

    #[test]
    fn noiseless_single_entry_exact() {
        let mut a = DenseMatrix::zeros(6, 6);
        a.set(2, 4, -(6f64).sqrt());
        for backend in [EstimateBackend::Explicit, EstimateBackend::Simulated] {
            let e = estimate_signal(&a, 1, 1, 0.5, 3, backend, 1.0).unwrap();
            let x = materialize(&e.factor, 6, 6).unwrap();
            assert!(x.sub(&a.scale(1.0 / 6f64.sqrt())).max_abs() < 1e-12, "{backend:?}");
        }
    }

    #[test]
    fn branch_and_bound_is_exhaustive() {
        for seed in 0..5 {
            let mm = DenseMatrix::new(7, 6, normal_vec(&mut rng(seed), 42)).unwrap();
            let (r, c) = best_2x2(&mm);
            let got = singular_values(&extract(&mm, &r, &c))[0];
            let mut want: f64 = 0.0;
            for i in 0..7 {
                for i2 in i + 1..7 {
                    for j in 0..6 {
                        for j2 in j + 1..6 {
                            want = want.max(singular_values(&extract(&mm, &[i, i2], &[j, j2]))[0]);
                        }
                    }
                }
            }
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn argmax_dominates_planted() {
        let p = gen_planted(20, 2, 1, 20f64.sqrt(), 4).unwrap();
        let e = estimate_signal(&p.a, 2, 1, 0.5, 1, EstimateBackend::Explicit, 0.05).unwrap();
        let mm = back_projection(&p.a, e.m, derive(1, 1), EstimateBackend::Explicit).unwrap();
        assert!(e.score >= score(&mm, &p.x) - 1e-9);
        assert!((e.score - score(&mm, &e.factor)).abs() < 1e-12);
    }

    #[test]
    fn backends_agree_in_law() {
        let a = DenseMatrix::new(4, 4, normal_vec(&mut rng(8), 16)).unwrap();
        let w: Vec<f64> = normal_vec(&mut rng(9), 16);
        let trials = 400;
        let stats = |backend| {
            let xs: Vec<f64> = (0..trials)
                .map(|t| dot(back_projection(&a, 30, t, backend).unwrap().data(), &w))
                .collect();
            let mean = xs.iter().sum::<f64>() / trials as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            (mean, var)
        };
        let (m1, v1) = stats(EstimateBackend::Explicit);
        let (m2, v2) = stats(EstimateBackend::Simulated);
        // E⟨M, w⟩ = ⟨v, w⟩ and Var = (‖v‖²‖w‖² + ⟨v,w⟩²)/m for both.
        let v = a.data();
        let want_mean = dot(v, &w);
        let want_var = (dot(v, v) * dot(&w, &w) + want_mean * want_mean) / 30.0;
        let se = (want_var / trials as f64).sqrt();
        assert!((m1 - want_mean).abs() < 4.0 * se && (m2 - want_mean).abs() < 4.0 * se, "{m1} {m2} {want_mean}");
        assert!((v1 / want_var - 1.0).abs() < 0.3 && (v2 / want_var - 1.0).abs() < 0.3, "{v1} {v2} {want_var}");
    }

    #[test]
    fn identity_inner_product_bound() {
        // ⟨X, X′⟩ ≥ 1 − ε²/2 implies ‖X − X′‖₂ ≤ ε for unit-Frobenius rank-1 pairs.
        for seed in 0..50u64 {
            let p = gen_planted(10, 2, 1, 0.0, seed).unwrap();
            let q = gen_planted(10, 2, 1, 0.0, seed + 1000).unwrap();
            let (x, y) = (materialize(&p.x, 10, 10).unwrap(), materialize(&q.x, 10, 10).unwrap());
            let ip = dot(x.data(), y.data());
            let eps = (2.0 - 2.0 * ip).max(0.0).sqrt();
            assert!(crate::linalg::spectral_norm(&x.sub(&y)) <= eps + 1e-9);
        }
    }
}
