//! Continued fractions and a finite audit of the Diophantine condition
//! `‖nω‖ ≥ C_ω / (n (log n)^α)`.

use crate::error::{Error, Result};
use serde::Serialize;

/// Euclidean remainder below which the expansion is treated as terminated.
pub const RATIONAL_THRESHOLD: f64 = 1e-15;

/// `ω = [0; a_1, a_2, ...]` with convergents `p_j / q_j`, `j ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuedFraction {
    pub partial_quotients: Vec<u64>,
    pub convergents: Vec<(u64, u64)>,
    /// The expansion stopped because the remainder vanished.
    pub terminated: bool,
}

/// Continued fraction expansion of `omega ∈ (0, 1)` to at most `depth` terms.
///
/// Stops early once the Euclidean remainder or the convergent error drops
/// below [`RATIONAL_THRESHOLD`].
pub fn continued_fraction(omega: f64, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be ≥ 1".into()));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::InvalidInput(format!("omega {omega} not in (0, 1)")));
    }
    let mut quotients = Vec::new();
    let mut convergents = Vec::new();
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (0u64, 1u64);
    let mut rem = omega;
    let mut terminated = false;
    while quotients.len() < depth {
        let inv = 1.0 / rem;
        let a = inv.floor();
        if !(a >= 1.0) || a > u64::MAX as f64 {
            break;
        }
        let a = a as u64;
        let next = a
            .checked_mul(p)
            .and_then(|v| v.checked_add(p_prev))
            .zip(a.checked_mul(q).and_then(|v| v.checked_add(q_prev)));
        let Some((p_new, q_new)) = next else { break };
        quotients.push(a);
        convergents.push((p_new, q_new));
        (p_prev, q_prev, p, q) = (p, q, p_new, q_new);
        rem = inv - a as f64;
        // a convergent equal to ω in double precision ends the expansion too
        if rem < RATIONAL_THRESHOLD || (omega - p as f64 / q as f64).abs() < RATIONAL_THRESHOLD {
            terminated = true;
            break;
        }
    }
    Ok(ContinuedFraction {
        partial_quotients: quotients,
        convergents,
        terminated,
    })
}

/// Distance to the nearest integer.
pub fn dist_to_integer(v: f64) -> f64 {
    (v - v.round()).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineReport {
    pub omega: f64,
    pub alpha: f64,
    pub n_max: u64,
    pub worst_n: u64,
    /// `min_{2 ≤ n ≤ n_max} ‖nω‖ · n · (log n)^α`.
    pub margin: f64,
    pub is_rational: bool,
    /// `worst_n` is a denominator of a convergent of `ω`.
    pub worst_at_convergent: bool,
}

/// `‖nω‖` below this multiple of `n·ε` is treated as an exact zero.
const ZERO_TOL_ULPS: f64 = 4.0;

/// Scans `2 ≤ n ≤ n_max` for the smallest value of `‖nω‖·n·(log n)^α`.
pub fn diophantine_margin(omega: f64, alpha: f64, n_max: u64) -> Result<DiophantineReport> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("alpha {alpha} must exceed 1")));
    }
    if n_max < 2 {
        return Err(Error::InvalidInput("n_max must be ≥ 2".into()));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::InvalidInput(format!("omega {omega} not in (0, 1)")));
    }
    let mut worst_n = 2;
    let mut margin = f64::INFINITY;
    let mut is_rational = false;
    for n in 2..=n_max {
        let nf = n as f64;
        let mut d = dist_to_integer(nf * omega);
        if d <= ZERO_TOL_ULPS * nf * f64::EPSILON {
            d = 0.0;
        }
        let value = d * nf * nf.ln().powf(alpha);
        if value < margin {
            margin = value;
            worst_n = n;
        }
        if d == 0.0 {
            is_rational = true;
            break;
        }
    }
    let cf = continued_fraction(omega, 64)?;
    let worst_at_convergent = cf.convergents.iter().any(|&(_, q)| q == worst_n);
    Ok(DiophantineReport {
        omega,
        alpha,
        n_max,
        worst_n,
        margin,
        is_rational,
        worst_at_convergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{GOLDEN, SQRT2_MINUS_1};

    #[test]
    fn golden_expansion() {
        let cf = continued_fraction(GOLDEN, 10).unwrap();
        assert_eq!(cf.partial_quotients, vec![1; 10]);
        let q: Vec<u64> = cf.convergents.iter().map(|c| c.1).collect();
        assert_eq!(q, vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        assert!(!cf.terminated);
    }

    #[test]
    fn silver_expansion() {
        let cf = continued_fraction(SQRT2_MINUS_1, 6).unwrap();
        assert_eq!(cf.partial_quotients, vec![2; 6]);
        let q: Vec<u64> = cf.convergents.iter().map(|c| c.1).collect();
        assert_eq!(q, vec![2, 5, 12, 29, 70, 169]);
    }

    #[test]
    fn rational_terminates() {
        let cf = continued_fraction(0.5, 10).unwrap();
        assert!(cf.terminated);
        assert_eq!(cf.convergents, vec![(1, 2)]);
        let cf = continued_fraction(0.375, 10).unwrap();
        assert!(cf.terminated);
        assert_eq!(cf.convergents.last(), Some(&(3, 8)));
    }

    #[test]
    fn half_has_zero_margin() {
        let r = diophantine_margin(0.5, 2.0, 10).unwrap();
        assert_eq!(r.margin, 0.0);
        assert_eq!(r.worst_n, 2);
        assert!(r.is_rational);
    }

    #[test]
    fn golden_margin_positive_at_fibonacci() {
        let r = diophantine_margin(GOLDEN, 2.0, 10_000).unwrap();
        assert!(r.margin > 0.0);
        assert!(!r.is_rational);
        assert!(r.worst_at_convergent);
        let fib = [1u64, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765];
        assert!(fib.contains(&r.worst_n));
    }

    #[test]
    fn alpha_must_exceed_one() {
        assert!(diophantine_margin(GOLDEN, 1.0, 100).is_err());
        assert!(diophantine_margin(GOLDEN, 2.0, 1).is_err());
        assert!(continued_fraction(GOLDEN, 0).is_err());
    }
}
