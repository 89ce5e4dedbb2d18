//! Constructive ε-nets: grid nets on the sphere, sparse rank-1 nets, and
//! products of those with a τ grid for s×s-sparse rank-k matrices.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::budget::{self, binomial};
use crate::error::{param, Result};
use crate::matrix::{Component, SparseRankKFactor, SparseVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetStructure {
    Sphere,
    SparseRank1,
    Ssk,
    /// Ssk restricted to pairwise-disjoint supports.
    Osk,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub k: usize,
    pub eps: f64,
    pub tau_max: f64,
    pub structure: NetStructure,
}

impl NetSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return param(format!("net resolution {} outside (0,1)", self.eps));
        }
        if self.n == 0 || self.d == 0 || self.s == 0 || self.k == 0 {
            return param("net dimensions must be positive");
        }
        if self.s > self.n.min(self.d) {
            return param("sparsity exceeds dimension");
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return param("tau_max must be positive and finite");
        }
        Ok(())
    }

    /// Resolution of each rank-1 factor so that `tau_max · error ≤ eps/2k`.
    pub fn component_eps(&self) -> f64 {
        self.eps / (2.0 * self.k as f64 * self.tau_max)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Unit vectors covering `S^{d-1}` within `eps` (Euclidean).
///
/// Grid of step `eps/√d` around the origin; points whose norm is within
/// `eps/2` of 1 are normalized. Collinear grid points collapse to one entry.
pub fn sphere_net(d: usize, eps: f64) -> Result<Vec<Vec<f64>>> {
    sphere_net_with_budget(d, eps, budget::enumeration_budget())
}

pub fn sphere_net_with_budget(d: usize, eps: f64, budget: u64) -> Result<Vec<Vec<f64>>> {
    if d == 0 || !(eps > 0.0 && eps < 2.0) {
        return param(format!("sphere net needs d ≥ 1 and eps in (0,2), got d={d}, eps={eps}"));
    }
    if d == 1 {
        return Ok(vec![vec![1.0], vec![-1.0]]);
    }
    let h = eps / (d as f64).sqrt();
    let kmax = (1.0 / h).ceil() as i64 + 1;
    let side = (2 * kmax + 1) as f64;
    budget::check(side.powi(d as i32), budget)?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut z = vec![-kmax; d];
    loop {
        let p: Vec<f64> = z.iter().map(|&c| c as f64 * h).collect();
        let nrm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (nrm - 1.0).abs() <= eps / 2.0 {
            let g = z.iter().fold(0, |g, &c| gcd(g, c));
            let key: Vec<i64> = z.iter().map(|&c| c / g).collect();
            if seen.insert(key) {
                out.push(p.iter().map(|x| x / nrm).collect());
            }
        }
        // Odometer over the integer grid.
        let mut t = 0;
        loop {
            if t == d {
                return Ok(out);
            }
            z[t] += 1;
            if z[t] <= kmax {
                break;
            }
            z[t] = -kmax;
            t += 1;
        }
    }
}

/// All `s`-supports of `0..n` combined with the sphere net on `s` coordinates.
fn sparse_candidates(n: usize, s: usize, sphere: &[Vec<f64>]) -> Vec<SparseVec> {
    let mut out = Vec::new();
    for sup in (0..n).combinations(s) {
        for p in sphere {
            out.push(SparseVec::new(
                sup.iter().zip(p).filter(|(_, v)| **v != 0.0).map(|(&i, &v)| (i, v)),
            ));
        }
    }
    out
}

pub fn sparse_rank1_count(n: usize, d: usize, s: usize, sphere_len: usize) -> f64 {
    binomial(n, s) * binomial(d, s) * (sphere_len as f64).powi(2)
}

/// Pairs `(x, y)` such that every `s×s`-sparse rank-1 matrix of unit
/// Frobenius norm lies within `eps` of some `x yᵀ`.
pub fn sparse_rank1_net(
    n: usize,
    d: usize,
    s: usize,
    eps: f64,
) -> Result<impl Iterator<Item = (SparseVec, SparseVec)> + Clone> {
    sparse_rank1_net_with_budget(n, d, s, eps, budget::enumeration_budget())
}

pub fn sparse_rank1_net_with_budget(
    n: usize,
    d: usize,
    s: usize,
    eps: f64,
    budget: u64,
) -> Result<impl Iterator<Item = (SparseVec, SparseVec)> + Clone> {
    if s == 0 || s > n.min(d) {
        return param(format!("sparsity {s} invalid for {n}x{d}"));
    }
    let sphere = sphere_net_with_budget(s, eps / 2.0, budget)?;
    budget::check(sparse_rank1_count(n, d, s, sphere.len()), budget)?;
    let xs = std::rc::Rc::new(sparse_candidates(n, s, &sphere));
    let ys = std::rc::Rc::new(sparse_candidates(d, s, &sphere));
    let ny = ys.len();
    Ok((0..xs.len() * ny).map(move |t| (xs[t / ny].clone(), ys[t % ny].clone())))
}

/// `{0, ±step, ±2·step, …, ±tau_max}` with `step = eps/2k`.
pub fn tau_grid(eps: f64, k: usize, tau_max: f64) -> Vec<f64> {
    let step = eps / (2.0 * k as f64);
    let m = (tau_max / step).floor() as usize;
    let mut out = vec![0.0];
    for i in 1..=m {
        out.push(i as f64 * step);
        out.push(-(i as f64) * step);
    }
    if (m as f64) * step < tau_max {
        out.push(tau_max);
        out.push(-tau_max);
    }
    out
}

/// Enumeration count of [`ssk_net`] before the disjointness filter.
pub fn ssk_net_count(spec: &NetSpec) -> Result<f64> {
    spec.validate()?;
    let sphere = sphere_net_with_budget(spec.s, spec.component_eps() / 2.0, u64::MAX)?;
    let per = sparse_rank1_count(spec.n, spec.d, spec.s, sphere.len())
        * tau_grid(spec.eps, spec.k, spec.tau_max).len() as f64;
    Ok(per.powi(spec.k as i32))
}

/// Factors covering bounded `S_{s,k}` (or `O_{s,k}`) within `eps`.
/// Zero-τ slots are dropped, so lower-rank factors appear as well.
pub fn ssk_net(spec: &NetSpec) -> Result<impl Iterator<Item = SparseRankKFactor>> {
    ssk_net_with_budget(spec, budget::enumeration_budget())
}

pub fn ssk_net_with_budget(spec: &NetSpec, budget: u64) -> Result<impl Iterator<Item = SparseRankKFactor>> {
    spec.validate()?;
    if !matches!(spec.structure, NetStructure::Ssk | NetStructure::Osk) {
        return param("ssk_net needs structure ssk or osk");
    }
    budget::check(ssk_net_count(spec)?, budget)?;
    let sphere = sphere_net_with_budget(spec.s, spec.component_eps() / 2.0, budget)?;
    let xs = sparse_candidates(spec.n, spec.s, &sphere);
    let ys = sparse_candidates(spec.d, spec.s, &sphere);
    let taus = tau_grid(spec.eps, spec.k, spec.tau_max);
    let (nx, ny, nt) = (xs.len(), ys.len(), taus.len());
    let per = nx * ny * nt;
    let total = per.pow(spec.k as u32);
    let (s, k, disjoint) = (spec.s, spec.k, spec.structure == NetStructure::Osk);
    Ok((0..total).filter_map(move |mut code| {
        let mut components = Vec::with_capacity(k);
        for _ in 0..k {
            let c = code % per;
            code /= per;
            let tau = taus[c % nt];
            let r = c / nt;
            if tau != 0.0 {
                components.push(Component { tau, x: xs[r / ny].clone(), y: ys[r % ny].clone() });
            }
        }
        let f = SparseRankKFactor { components, s, k };
        (!disjoint || f.is_disjoint()).then_some(f)
    }))
}
