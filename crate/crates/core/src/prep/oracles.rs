//! Classical references the simulated preparations are checked against.

use crate::arithmetic::{FunctionTablePair, OracleData, ScalarConstant};
use crate::error::{invalid, Result};

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// `(C/α_i) / ‖C/ᾱ‖₂`.
pub fn classical_target_inverse(data: &OracleData, c: u64) -> Result<Vec<f64>> {
    let constant = ScalarConstant::inverse(c, data)?;
    Ok(normalized(unnormalized_target(data, &constant)))
}

/// `(β_i/α_i) / ‖β̄/ᾱ‖₂`.
pub fn classical_target_division(data: &OracleData, betas: &[u64]) -> Result<Vec<f64>> {
    let constant = ScalarConstant::division(betas.to_vec(), data)?;
    Ok(normalized(unnormalized_target(data, &constant)))
}

/// The ratios `numerator_i / α_i` before normalization.
pub fn unnormalized_target(data: &OracleData, constant: &ScalarConstant) -> Vec<f64> {
    data.alphas()
        .iter()
        .enumerate()
        .map(|(i, &a)| constant.numerator(i) as f64 / a as f64)
        .collect()
}

/// `#{ j < 2^m : α·j < C·2^m }`, by enumeration.
pub fn counting_oracle_inverse(alpha: u64, c: u64, m: usize) -> Result<u64> {
    if alpha == 0 || c == 0 {
        return Err(invalid("counting oracle needs α ≥ 1 and C ≥ 1"));
    }
    if m == 0 || m > 32 {
        return Err(invalid(format!("grid width m = {m} outside 1..=32")));
    }
    let threshold = (c as u128) << m;
    Ok((0..1u64 << m)
        .filter(|&j| (alpha as u128) * (j as u128) < threshold)
        .count() as u64)
}

/// Counts for every index of `data` under `constant`.
pub fn counts_for(data: &OracleData, constant: &ScalarConstant, m: usize) -> Result<Vec<u64>> {
    data.alphas()
        .iter()
        .enumerate()
        .map(|(i, &a)| counting_oracle_inverse(a, constant.numerator(i), m))
        .collect()
}

/// `#{ j < 2^m : tables accept (α, j) }` with `m` the grid width of the
/// tables.
pub fn counting_oracle_general(alpha: u64, tables: &FunctionTablePair) -> Result<u64> {
    if alpha >= 1u64 << tables.n() {
        return Err(invalid(format!(
            "α = {alpha} is outside the {}-bit domain of the forward table",
            tables.n()
        )));
    }
    let mut count = 0;
    for j in 0..1u64 << tables.m() {
        if tables.accepts(alpha, j)? {
            count += 1;
        }
    }
    Ok(count)
}

/// `t_i / ‖t̄‖₂`.
pub fn normalized_counts(counts: &[u64]) -> Vec<f64> {
    normalized(counts.iter().map(|&t| t as f64).collect())
}

/// `Σ_i (t_i / 2^m)² / d`: the good-subspace mass before amplification.
pub fn discrete_success_probability(counts: &[u64], m: usize) -> f64 {
    let scale = (-(m as f64)).exp2();
    counts.iter().map(|&t| (t as f64 * scale).powi(2)).sum::<f64>() / counts.len() as f64
}
