use serde::{Deserialize, Serialize};

use super::dd::Dd;
use crate::error::{param, Result};

/// Largest degree for which monomial coefficients are expanded.
pub const MAX_COEFF_DEGREE: usize = 64;

/// `p(x) = (1+γ)α · T_q(x/α) / T_q(1+γ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPoly {
    pub q: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// Monomial coefficients, lowest degree first.
    pub coeffs: Vec<f64>,
    #[serde(skip)]
    coeffs_dd: Vec<Dd>,
}

fn check(q: usize, alpha: f64, gamma: f64) -> Result<()> {
    if q == 0 || !(alpha > 0.0 && alpha.is_finite()) || !(gamma > 0.0 && gamma <= 1.0) {
        return param(format!("chebyshev_poly needs q ≥ 1, α > 0, γ ∈ (0,1]; got q={q}, α={alpha}, γ={gamma}"));
    }
    Ok(())
}

/// Monomial coefficients of `T_q` by the three-term recurrence.
fn chebyshev_t_coeffs(q: usize) -> Vec<Dd> {
    let mut prev = vec![Dd::new(1.0)];
    if q == 0 {
        return prev;
    }
    let mut cur = vec![Dd::ZERO, Dd::new(1.0)];
    for _ in 1..q {
        let mut next = vec![Dd::ZERO; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] = next[i + 1] + c * Dd::new(2.0);
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] = next[i] - c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `T_q(t)` for `t ≥ 1` in double-double.
fn chebyshev_t_dd(q: usize, t: f64) -> Dd {
    let t = Dd::new(t);
    let (mut a, mut b) = (Dd::new(1.0), t);
    for _ in 1..q {
        let c = Dd::new(2.0) * t * b - a;
        a = b;
        b = c;
    }
    b
}

/// `T_q(t) / T_q(t0)` for `t0 > 1`, without overflow.
pub fn chebyshev_ratio(q: usize, t: f64, t0: f64) -> f64 {
    let qf = q as f64;
    let b = t0.acosh();
    let denom_tail = 1.0 + (-2.0 * qf * b).exp();
    if t.abs() <= 1.0 {
        (qf * t.acos()).cos() * 2.0 * (-qf * b).exp() / denom_tail
    } else {
        let a = t.abs().acosh();
        let sign = if t < 0.0 && q % 2 == 1 { -1.0 } else { 1.0 };
        sign * (qf * (a - b)).exp() * (1.0 + (-2.0 * qf * a).exp()) / denom_tail
    }
}

impl ChebyshevPoly {
    /// Builds the polynomial with its monomial expansion; `q ≤ 64`.
    pub fn new(q: usize, alpha: f64, gamma: f64) -> Result<Self> {
        check(q, alpha, gamma)?;
        if q > MAX_COEFF_DEGREE {
            return param(format!("monomial expansion limited to degree {MAX_COEFF_DEGREE}, got {q}"));
        }
        let t = chebyshev_t_coeffs(q);
        let scale = Dd::new((1.0 + gamma) * alpha) / chebyshev_t_dd(q, 1.0 + gamma);
        let inv_alpha = Dd::new(1.0) / Dd::new(alpha);
        let mut pow = Dd::new(1.0);
        let mut coeffs_dd = Vec::with_capacity(q + 1);
        for c in t {
            coeffs_dd.push(scale * c * pow);
            pow = pow * inv_alpha;
        }
        let coeffs = coeffs_dd.iter().map(|c| c.to_f64()).collect();
        Ok(Self { q, alpha, gamma, coeffs, coeffs_dd })
    }

    /// Closed-form evaluation only, any degree.
    pub fn closed_form(q: usize, alpha: f64, gamma: f64) -> Result<Self> {
        check(q, alpha, gamma)?;
        Ok(Self { q, alpha, gamma, coeffs: Vec::new(), coeffs_dd: Vec::new() })
    }

    pub fn has_coeffs(&self) -> bool {
        !self.coeffs.is_empty()
    }

    /// Stable evaluation through `cos`/`cosh`.
    pub fn eval(&self, x: f64) -> f64 {
        (1.0 + self.gamma) * self.alpha * chebyshev_ratio(self.q, x / self.alpha, 1.0 + self.gamma)
    }

    /// Horner on the double-double monomial coefficients.
    pub fn eval_coeffs(&self, x: f64) -> f64 {
        let coeffs = if self.coeffs_dd.is_empty() && !self.coeffs.is_empty() {
            self.coeffs.iter().map(|&c| Dd::new(c)).collect()
        } else {
            self.coeffs_dd.clone()
        };
        let xd = Dd::new(x);
        coeffs.iter().rev().fold(Dd::ZERO, |acc, &c| acc * xd + c).to_f64()
    }

    /// `p(√λ)/√λ`, the even companion used on Gram-matrix spectra. Requires odd `q`.
    pub fn eval_gram(&self, lambda: f64) -> f64 {
        debug_assert!(self.q % 2 == 1);
        if lambda <= f64::MIN_POSITIVE {
            // Limit p'(0) = scale · T_q'(0) / α with T_q'(0) = q·sin(qπ/2).
            let qf = self.q as f64;
            let s = (qf * std::f64::consts::FRAC_PI_2).sin();
            return (1.0 + self.gamma) * qf * s * chebyshev_ratio(self.q, 1.0, 1.0 + self.gamma);
        }
        let x = lambda.sqrt();
        self.eval(x) / x
    }

    /// Recurrence evaluation of `T_q(x/α)` scaled like `p`; an independent path for tests.
    pub fn eval_recurrence(&self, x: f64) -> f64 {
        let t = x / self.alpha;
        let (mut a, mut b) = (1.0, t);
        for _ in 1..self.q {
            let c = 2.0 * t * b - a;
            a = b;
            b = c;
        }
        let t0 = 1.0 + self.gamma;
        let (mut a0, mut b0) = (1.0, t0);
        for _ in 1..self.q {
            let c = 2.0 * t0 * b0 - a0;
            a0 = b0;
            b0 = c;
        }
        (1.0 + self.gamma) * self.alpha * b / b0
    }

    /// `α / 2^{q√γ − 1}`.
    pub fn small_bound(&self) -> f64 {
        self.alpha / 2f64.powf(self.q as f64 * self.gamma.sqrt() - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_is_identity() {
        let p = ChebyshevPoly::new(1, 0.7, 0.3).unwrap();
        for x in [0.0, 0.5, 1.3] {
            assert!((p.eval(x) - x).abs() < 1e-15);
            assert!((p.eval_coeffs(x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn q3_small_bound() {
        let p = ChebyshevPoly::new(3, 1.0, 0.25).unwrap();
        assert!(p.eval(1.0).abs() <= p.small_bound() * (1.0 + 1e-9));
        assert!((p.small_bound() - 2f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn t_coeffs_known() {
        let t4: Vec<f64> = chebyshev_t_coeffs(4).iter().map(|c| c.to_f64()).collect();
        assert_eq!(t4, vec![1.0, 0.0, -8.0, 0.0, 8.0]);
    }

    #[test]
    fn three_paths_agree() {
        for q in [5usize, 9, 15, 33] {
            let p = ChebyshevPoly::new(q, 0.8, 0.25).unwrap();
            for i in 0..100 {
                let x = 2.0 * (1.25 * 0.8) * i as f64 / 99.0;
                let (a, b, c) = (p.eval(x), p.eval_coeffs(x), p.eval_recurrence(x));
                let scale = a.abs().max(p.small_bound());
                assert!((a - b).abs() <= 1e-9 * scale, "q={q} x={x}: {a} vs {b}");
                assert!((a - c).abs() <= 1e-9 * scale, "q={q} x={x}: {a} vs {c}");
            }
        }
    }

    #[test]
    fn gram_companion() {
        let p = ChebyshevPoly::closed_form(45, 1.0, 0.2).unwrap();
        for lam in [0.01, 0.5, 1.0, 2.0] {
            assert!((p.eval_gram(lam) * lam.sqrt() - p.eval(lam.sqrt())).abs() < 1e-12 * p.eval(lam.sqrt()).abs().max(1e-300));
        }
        let small = p.eval_gram(1e-20);
        let tiny = p.eval_gram(0.0);
        assert!((small - tiny).abs() <= 1e-6 * tiny.abs().max(1e-300), "{small} vs {tiny}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ChebyshevPoly::new(0, 1.0, 0.5).is_err());
        assert!(ChebyshevPoly::new(3, 1.0, 1.5).is_err());
        assert!(ChebyshevPoly::new(65, 1.0, 0.5).is_err());
        assert!(ChebyshevPoly::closed_form(101, 1.0, 0.5).is_ok());
    }

    #[test]
    fn no_overflow_high_degree() {
        let p = ChebyshevPoly::closed_form(301, 1.0, 0.04).unwrap();
        assert!(p.eval(0.5).is_finite());
        assert!(p.eval(1.04) > 1.03 && p.eval(1.04) < 1.05);
    }
}
