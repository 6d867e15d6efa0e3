//! Block backend: the index register stays classical, each index value
//! carries a sparse local state, and amplification uses the closed form
//! `Q = (2|ψ⟩⟨ψ| − 1)·S_good`.

use num_complex::Complex64;

use crate::amplification::optimal_rounds;
use crate::arithmetic::{
    compare_general_permutation, compare_permutation, function_load_permutation, index_width,
    multiply_permutation, regs, ScalarConstant,
};
use crate::block::{BlockState, SparseState};
use crate::error::{PrepError, Result};
use crate::layout::RegisterLayout;
use crate::permutation::BasisPermutation;
use crate::statevector::{Statevector, REDUCTION_TOL, SUPPORT_EPS};

use super::{assemble_report, real_amplitudes, AaRounds, GeneralPrepConfig, InversePrepConfig, PrepConfig, PrepReport};

const LOCAL_BUDGET: usize = 63;

struct Prepared {
    psi: BlockState,
    good: Vec<(&'static str, u64)>,
    alphas: Vec<u64>,
    multiplications: usize,
}

fn seed_blocks(alphas: &[u64], local: &RegisterLayout) -> Result<BlockState> {
    let d = alphas.len();
    let mut state = BlockState::uniform(regs::INDEX, index_width(d), d, local.clone())?;
    let w = Complex64::new((d as f64).sqrt().recip(), 0.0);
    state.for_each_block(|i, b| {
        *b = SparseState::basis(local.clone(), &[(regs::DATA, alphas[i])], w)?;
        Ok(())
    })?;
    Ok(state)
}

fn prepare_inverse_blocks(c: &InversePrepConfig) -> Result<Prepared> {
    let (n, m) = (c.data.n(), c.m);
    let mut local = RegisterLayout::with_budget(LOCAL_BUDGET);
    local
        .push(regs::DATA, n)?
        .push(regs::WORK, m + n)?
        .push(regs::FLAG, 1)?;
    let mult = multiply_permutation(&local, regs::DATA, regs::WORK)?;
    let unmult = mult.inverse();
    let compares: Vec<BasisPermutation> = match &c.constant {
        ScalarConstant::Uniform(_) => {
            vec![compare_permutation(&local, regs::WORK, c.constant.threshold(0, m), regs::FLAG)?]
        }
        ScalarConstant::PerIndex(b) => (0..b.len())
            .map(|i| compare_permutation(&local, regs::WORK, c.constant.threshold(i, m), regs::FLAG))
            .collect::<Result<_>>()?,
    };

    let mut psi = seed_blocks(c.data.alphas(), &local)?;
    psi.for_each_block(|i, b| {
        b.apply_hadamard_layer(regs::WORK, m)?;
        b.apply_permutation(&mult)?;
        b.apply_permutation(&compares[i.min(compares.len() - 1)])?;
        b.apply_permutation(&unmult)?;
        b.apply_hadamard_layer(regs::WORK, m)
    })?;
    Ok(Prepared {
        psi,
        good: vec![(regs::WORK, 0), (regs::FLAG, 0)],
        alphas: c.data.alphas().to_vec(),
        multiplications: 2,
    })
}

fn prepare_general_blocks(c: &GeneralPrepConfig) -> Result<Prepared> {
    let tables = &c.tables;
    let m = tables.m();
    let mut local = RegisterLayout::with_budget(LOCAL_BUDGET);
    local
        .push(regs::DATA, tables.n())?
        .push(regs::WORK, m)?
        .push_with_format(regs::FORWARD, tables.g().format())?
        .push_with_format(regs::BACKWARD, tables.hinv().format())?
        .push(regs::FLAG, 1)?;
    let load_g = function_load_permutation(&local, regs::DATA, regs::FORWARD, tables.g().values())?;
    let load_h = function_load_permutation(&local, regs::WORK, regs::BACKWARD, tables.hinv().values())?;
    let compare = compare_general_permutation(&local, regs::FORWARD, regs::BACKWARD, tables.mode(), regs::FLAG)?;

    let mut psi = seed_blocks(c.data.alphas(), &local)?;
    psi.for_each_block(|_, b| {
        b.apply_hadamard_layer(regs::WORK, m)?;
        b.apply_permutation(&load_g)?;
        b.apply_permutation(&load_h)?;
        b.apply_permutation(&compare)?;
        b.apply_permutation(&load_h)?;
        b.apply_permutation(&load_g)?;
        b.apply_hadamard_layer(regs::WORK, m)
    })?;
    Ok(Prepared {
        psi,
        good: vec![(regs::WORK, 0), (regs::FLAG, 0)],
        alphas: c.data.alphas().to_vec(),
        multiplications: tables.multiplications(),
    })
}

/// Post-selects, checks every block holds only `|α_i⟩_B` with all other
/// local registers clear, and returns phase-fixed real amplitudes.
fn extract(state: &BlockState, prepared: &Prepared) -> Result<(Vec<f64>, Statevector)> {
    let (projected, _) = state.project_and_renormalize(&prepared.good)?;
    let d = prepared.alphas.len();
    let mut amps = Vec::with_capacity(d);
    for (i, block) in projected.blocks().iter().enumerate() {
        let expected = block.layout().index_of(&[(regs::DATA, prepared.alphas[i])])?;
        let stray: f64 = block
            .iter()
            .filter(|&(idx, a)| idx != expected && a.norm() > SUPPORT_EPS)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if stray > REDUCTION_TOL {
            return Err(PrepError::Precondition(format!(
                "block {i} keeps weight {stray:.3e} outside |α_i⟩ after post-selection"
            )));
        }
        amps.push(block.get(expected));
    }
    let l = index_width(d);
    let mut full = vec![Complex64::new(0.0, 0.0); 1 << l];
    full[..d].copy_from_slice(&amps);
    let pivot = full
        .iter()
        .copied()
        .fold(Complex64::new(0.0, 0.0), |acc, a| if a.norm() > acc.norm() { a } else { acc });
    if pivot.norm() == 0.0 {
        return Err(PrepError::ZeroProbability);
    }
    let phase = pivot.conj() / pivot.norm();
    full.iter_mut().for_each(|a| *a *= phase);
    let real = real_amplitudes(&full, d)?;
    let layout = RegisterLayout::from_widths([(regs::INDEX, l)])?;
    Ok((real, Statevector::from_amplitudes(layout, full)?))
}

pub(crate) fn run_block(config: &PrepConfig) -> Result<(Statevector, PrepReport)> {
    let prepared = match config {
        PrepConfig::Inverse(c) => prepare_inverse_blocks(c)?,
        PrepConfig::General(c) => prepare_general_blocks(c)?,
    };
    let psi = &prepared.psi;
    let p_raw = psi.probability(&prepared.good)?;
    if p_raw <= 0.0 {
        return Err(PrepError::ZeroProbability);
    }
    let (raw, _) = extract(psi, &prepared)?;
    let rounds = match config.aa() {
        AaRounds::Auto => optimal_rounds(p_raw)?,
        AaRounds::Fixed(k) => k,
    };
    let mut state = psi.clone();
    for _ in 0..rounds {
        state.apply_phase_flip(&prepared.good)?;
        state.reflect_about(psi)?;
    }
    let p_final = state.probability(&prepared.good)?;
    let (amps, index_state) = extract(&state, &prepared)?;
    let report = assemble_report(
        &raw,
        p_raw,
        amps,
        p_final,
        rounds,
        prepared.multiplications,
        config.target(),
    );
    Ok((index_state, report))
}
