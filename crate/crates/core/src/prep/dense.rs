use std::sync::Arc;

use crate::amplification::{apply_rounds, optimal_rounds, success_probability, GoodSubspace, PreparationProgram, Step};
use crate::arithmetic::{
    compare_general_permutation, compare_permutation, function_load_permutation, index_width,
    indexed_compare_permutation, multiply_permutation, oracle_permutation, oracle_unload, regs,
    Guard, OracleData, ScalarConstant,
};
use crate::error::{PrepError, Result};
use crate::layout::RegisterLayout;
use crate::statevector::Statevector;

use super::uniform::{needs_ancillas, uniform_program};
use super::{assemble_report, real_amplitudes, AaRounds, PrepConfig, PrepReport};

/// Full-register circuit: the preparation unitary as a program over one
/// dense layout, and the subspace it amplifies and post-selects.
#[derive(Debug, Clone)]
pub struct DenseCircuit {
    layout: RegisterLayout,
    program: PreparationProgram,
    good: GoodSubspace,
    data: OracleData,
    comparator: usize,
}

impl DenseCircuit {
    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn program(&self) -> &PreparationProgram {
        &self.program
    }

    /// Mutable access, e.g. to swap a step for a deliberately wrong one.
    pub fn program_mut(&mut self) -> &mut PreparationProgram {
        &mut self.program
    }

    pub fn good(&self) -> &GoodSubspace {
        &self.good
    }

    pub fn data(&self) -> &OracleData {
        &self.data
    }

    /// Position of the comparator step in the program.
    pub fn comparator_step(&self) -> usize {
        self.comparator
    }
}

fn base_layout(d: usize) -> Result<RegisterLayout> {
    let mut layout = RegisterLayout::new();
    layout.push(regs::INDEX, index_width(d))?;
    if needs_ancillas(d) {
        layout.push(regs::ANC1, 1)?.push(regs::ANC2, 1)?;
    }
    Ok(layout)
}

fn good_for(d: usize) -> Result<GoodSubspace> {
    let mut conds = vec![(regs::WORK, 0), (regs::FLAG, 0)];
    if needs_ancillas(d) {
        conds.extend([(regs::ANC1, 0), (regs::ANC2, 0)]);
    }
    GoodSubspace::new(conds)
}

/// Builds the dense circuit for `config`.
pub fn dense_circuit(config: &PrepConfig) -> Result<DenseCircuit> {
    match config {
        PrepConfig::Inverse(c) => inverse_circuit(&c.data, &c.constant, c.m),
        PrepConfig::General(c) => general_circuit(c),
    }
}

fn inverse_circuit(data: &OracleData, constant: &ScalarConstant, m: usize) -> Result<DenseCircuit> {
    let d = data.d();
    let n = data.n();
    let mut layout = base_layout(d)?;
    layout
        .push(regs::DATA, n)?
        .push(regs::WORK, m + n)?
        .push(regs::FLAG, 1)?;

    let mut program = uniform_program(&layout, d, 0.0)?.full;
    program
        .permute(
            oracle_permutation(&layout, data, regs::INDEX, regs::DATA)?,
            vec![
                Guard::Below(regs::INDEX.into(), d as u64),
                Guard::Clear(regs::DATA.into()),
            ],
        )
        .hadamard(regs::WORK, m);
    let mult = multiply_permutation(&layout, regs::DATA, regs::WORK)?;
    program.multiply(
        mult.clone(),
        vec![
            Guard::NonZero(regs::DATA.into()),
            Guard::Below(regs::WORK.into(), 1u64 << m),
        ],
    );
    let comparator = program.len();
    let compare = match constant {
        ScalarConstant::Uniform(_) => {
            compare_permutation(&layout, regs::WORK, constant.threshold(0, m), regs::FLAG)?
        }
        ScalarConstant::PerIndex(b) => indexed_compare_permutation(
            &layout,
            regs::INDEX,
            regs::WORK,
            (0..b.len()).map(|i| constant.threshold(i, m)).collect(),
            regs::FLAG,
        )?,
    };
    program
        .permute(compare, vec![Guard::Clear(regs::FLAG.into())])
        .multiply(
            mult.inverse(),
            vec![Guard::ProductImage {
                data: regs::DATA.into(),
                work: regs::WORK.into(),
                m,
            }],
        )
        .hadamard(regs::WORK, m);

    Ok(DenseCircuit {
        layout,
        program,
        good: good_for(d)?,
        data: data.clone(),
        comparator,
    })
}

fn general_circuit(config: &super::GeneralPrepConfig) -> Result<DenseCircuit> {
    let data = &config.data;
    let tables = &config.tables;
    let d = data.d();
    let m = tables.m();
    let mut layout = base_layout(d)?;
    layout
        .push(regs::DATA, tables.n())?
        .push(regs::WORK, m)?
        .push_with_format(regs::FORWARD, tables.g().format())?
        .push_with_format(regs::BACKWARD, tables.hinv().format())?
        .push(regs::FLAG, 1)?;

    let load_g = function_load_permutation(&layout, regs::DATA, regs::FORWARD, tables.g().values())?;
    let load_h = function_load_permutation(&layout, regs::WORK, regs::BACKWARD, tables.hinv().values())?;

    let mut program = uniform_program(&layout, d, 0.0)?.full;
    program
        .permute(
            oracle_permutation(&layout, data, regs::INDEX, regs::DATA)?,
            vec![
                Guard::Below(regs::INDEX.into(), d as u64),
                Guard::Clear(regs::DATA.into()),
            ],
        )
        .hadamard(regs::WORK, m)
        .permute(load_g.clone(), vec![Guard::Clear(regs::FORWARD.into())])
        .permute(load_h.clone(), vec![Guard::Clear(regs::BACKWARD.into())]);
    let comparator = program.len();
    program
        .push(Step::Permute {
            perm: Arc::new(compare_general_permutation(
                &layout,
                regs::FORWARD,
                regs::BACKWARD,
                tables.mode(),
                regs::FLAG,
            )?),
            guards: vec![Guard::Clear(regs::FLAG.into())],
            multiplications: tables.multiplications(),
        })
        .permute(load_h, Vec::new())
        .permute(load_g, Vec::new())
        .hadamard(regs::WORK, m);

    Ok(DenseCircuit {
        layout,
        program,
        good: good_for(d)?,
        data: data.clone(),
        comparator,
    })
}

/// Post-selects the good subspace, clears the data register and returns the
/// index-register amplitudes.
fn extract(state: &Statevector, circuit: &DenseCircuit) -> Result<(Vec<f64>, Statevector)> {
    let d = circuit.data.d();
    let (mut projected, _) = state.project_and_renormalize(circuit.good.conditions())?;
    oracle_unload(&mut projected, &circuit.data)?;
    let reduced = projected.reduced_state(regs::INDEX)?;
    let amps = real_amplitudes(&reduced, d)?;
    let index_layout = RegisterLayout::from_widths([(regs::INDEX, index_width(d))])?;
    Ok((amps, Statevector::from_amplitudes(index_layout, reduced)?))
}

/// Runs `circuit`: prepare, amplify, post-select, unload.
pub fn run_dense(
    circuit: &DenseCircuit,
    aa: AaRounds,
    target: Option<Vec<f64>>,
) -> Result<(Statevector, PrepReport)> {
    let mut state = circuit.program.prepare(&circuit.layout)?;
    let p_raw = success_probability(&state, &circuit.good)?;
    if p_raw <= 0.0 {
        return Err(PrepError::ZeroProbability);
    }
    let (raw, _) = extract(&state, circuit)?;
    let rounds = match aa {
        AaRounds::Auto => optimal_rounds(p_raw)?,
        AaRounds::Fixed(k) => k,
    };
    apply_rounds(&mut state, &circuit.program, &circuit.good, rounds)?;
    let p_final = success_probability(&state, &circuit.good)?;
    let (amps, index_state) = extract(&state, circuit)?;
    let report = assemble_report(
        &raw,
        p_raw,
        amps,
        p_final,
        rounds,
        circuit.program.multiplication_count(),
        target,
    );
    Ok((index_state, report))
}
