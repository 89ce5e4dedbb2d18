//! Enumeration budget shared by nets and oracles.

use crate::error::{Result, SlraError};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const BUDGET_ENV: &str = "SLRA_BUDGET";

/// The default budget, lowered (never raised) by `SLRA_BUDGET`.
pub fn enumeration_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map_or(DEFAULT_BUDGET, |b| b.min(DEFAULT_BUDGET))
}

pub fn check(count: f64, budget: u64) -> Result<()> {
    if count.is_finite() && count <= budget as f64 {
        Ok(())
    } else {
        Err(SlraError::OracleInfeasible { count, budget })
    }
}

/// `C(n, k)` as a float (exact for the sizes we enumerate).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(40, 2), 780.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(7, 0), 1.0);
    }

    #[test]
    fn check_rejects_over_budget() {
        assert!(check(10.0, 10).is_ok());
        assert!(matches!(check(11.0, 10), Err(SlraError::OracleInfeasible { .. })));
        assert!(check(f64::INFINITY, 10).is_err());
    }
}
