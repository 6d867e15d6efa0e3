//! Cost accounting in multiplier invocations: the inequality test against a
//! Newton–Raphson reciprocal, and concrete amplification round counts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::amplification::optimal_rounds;
use crate::arithmetic::{OracleData, ScalarConstant};
use crate::error::{invalid, PrepError, Result};
use crate::prep::{counts_for, discrete_success_probability};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub multiplications: usize,
    /// Qubit overhead relative to one working register.
    pub extra_qubit_factor: f64,
    pub aa_rounds: usize,
}

/// Multiply, compare, unmultiply: two multiplications at any precision.
pub fn cost_inequality_method() -> CostModel {
    CostModel {
        multiplications: 2,
        extra_qubit_factor: 0.0,
        aa_rounds: 0,
    }
}

/// `⌈log₂ log₂ (1/ε)⌉` Newton iterations, each with two multiplications
/// that must later be uncomputed.
pub fn cost_newton_raphson(epsilon: f64) -> Result<CostModel> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("precision ε = {epsilon} outside (0, 0.5)")));
    }
    let iterations = newton_iterations(epsilon);
    Ok(CostModel {
        multiplications: 4 * iterations,
        extra_qubit_factor: iterations as f64,
        aa_rounds: 0,
    })
}

fn newton_iterations(epsilon: f64) -> usize {
    let ll = (-epsilon.log2()).log2();
    // absorb rounding noise so exact powers like ε = 2^-16 give 4, not 5
    let snapped = ll.round();
    let ll = if (ll - snapped).abs() < 1e-12 { snapped } else { ll };
    ll.ceil().max(0.0) as usize
}

/// Rounds planned for the exact discrete success probability of the
/// reciprocal preparation with constant `c` and grid width `m`. Fails if the
/// count exceeds `⌈(π/4)·√d / ‖C/ᾱ‖₂⌉ + 1`.
pub fn aa_rounds_concrete(data: &OracleData, c: u64, m: usize) -> Result<usize> {
    let constant = ScalarConstant::inverse(c, data)?;
    let counts = counts_for(data, &constant, m)?;
    let p = discrete_success_probability(&counts, m);
    let rounds = optimal_rounds(p)?;
    let bound = asymptotic_round_bound(data, c);
    if rounds > bound {
        return Err(PrepError::BoundViolated(format!(
            "{rounds} rounds exceed the asymptotic bound {bound}"
        )));
    }
    Ok(rounds)
}

/// `⌈(π/4)·√d / ‖C/ᾱ‖₂⌉ + 1`.
pub fn asymptotic_round_bound(data: &OracleData, c: u64) -> usize {
    let norm = data
        .alphas()
        .iter()
        .map(|&a| (c as f64 / a as f64).powi(2))
        .sum::<f64>()
        .sqrt();
    (PI / 4.0 * (data.d() as f64).sqrt() / norm).ceil() as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inequality_is_two() {
        assert_eq!(cost_inequality_method().multiplications, 2);
        assert_eq!(cost_inequality_method(), cost_inequality_method());
    }

    #[test]
    fn newton_examples() {
        assert_eq!(cost_newton_raphson(2f64.powi(-16)).unwrap().multiplications, 16);
        assert_eq!(cost_newton_raphson(0.25).unwrap().multiplications, 4);
        assert_eq!(cost_newton_raphson(2f64.powi(-256)).unwrap().multiplications, 32);
        assert_eq!(cost_newton_raphson(2f64.powi(-16)).unwrap().extra_qubit_factor, 4.0);
        assert!(cost_newton_raphson(0.5).is_err());
        assert!(cost_newton_raphson(0.0).is_err());
    }

    #[test]
    fn newton_monotone_and_crossover() {
        let mut last = 0;
        for k in 2..400 {
            let eps = 2f64.powf(-(k as f64) / 4.0);
            if eps >= 0.5 {
                continue;
            }
            let c = cost_newton_raphson(eps).unwrap().multiplications;
            assert!(c >= last);
            last = c;
            if eps <= 1.0 / 16.0 {
                assert!(c >= 8 && cost_inequality_method().multiplications < c);
            }
        }
    }

    #[test]
    fn round_examples() {
        let d = OracleData::new(vec![3, 3, 3], 2).unwrap();
        assert_eq!(aa_rounds_concrete(&d, 3, 4).unwrap(), 0);
        let d = OracleData::new(vec![1, 2, 4], 3).unwrap();
        assert_eq!(aa_rounds_concrete(&d, 1, 4).unwrap(), 1);
        let d = OracleData::new(vec![8; 8], 4).unwrap();
        assert_eq!(aa_rounds_concrete(&d, 1, 6).unwrap(), 6);
    }
}
