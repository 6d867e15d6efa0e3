//! `(1/√d) Σ_{i<d} |i⟩` for arbitrary `d`.
//!
//! For `2^(l-1) < d < 2^l`: Hadamards on all `l` index bits, `anc1` marks
//! `i ≥ d`, `R_y(θ)` with `θ = 2·acos√(2^(l-2)/d)` on `anc2`, so the good
//! branch `anc1 = anc2 = 0` carries probability exactly 1/4 and a single
//! amplification round lifts it to 1.

use num_complex::Complex64;

use crate::amplification::{success_probability, GoodSubspace, PreparationProgram};
use crate::arithmetic::{compare_permutation, index_width, regs, Guard};
use crate::error::{invalid, PrepError, Result};
use crate::layout::RegisterLayout;
use crate::statevector::Statevector;

use super::report::PrepReport;

/// Rotation angle putting probability `2^(l-2)/d` on `anc2 = 0`.
pub fn uniform_theta(d: usize) -> f64 {
    let l = index_width(d);
    2.0 * ((l as f64 - 2.0).exp2() / d as f64).sqrt().acos()
}

pub(crate) fn needs_ancillas(d: usize) -> bool {
    d > 1 && !d.is_power_of_two()
}

pub(crate) fn uniform_good() -> GoodSubspace {
    GoodSubspace::new([(regs::ANC1, 0), (regs::ANC2, 0)]).expect("non-empty")
}

/// The un-amplified preparation (`head`) and the full one including its
/// amplification rounds.
pub(crate) struct UniformSteps {
    pub head: PreparationProgram,
    pub full: PreparationProgram,
    pub rounds: usize,
}

/// Steps building the uniform state on `I` from |0⟩. `theta_error` is
/// subtracted from the ideal rotation angle.
pub(crate) fn uniform_program(layout: &RegisterLayout, d: usize, theta_error: f64) -> Result<UniformSteps> {
    let l = layout.width(regs::INDEX)?;
    if d == 0 || (l < 64 && d as u64 > 1u64 << l) {
        return Err(invalid(format!("cannot spread over {d} labels of a {l}-bit register")));
    }
    let mut prog = PreparationProgram::new();
    if d.is_power_of_two() {
        if d > 1 {
            prog.hadamard(regs::INDEX, d.trailing_zeros() as usize);
        }
        return Ok(UniformSteps {
            head: prog.clone(),
            full: prog,
            rounds: 0,
        });
    }
    let mut inner = PreparationProgram::new();
    inner
        .hadamard(regs::INDEX, l)
        .permute(
            compare_permutation(layout, regs::INDEX, d as u64, regs::ANC1)?,
            vec![Guard::Clear(regs::ANC1.into())],
        )
        .ry(layout.global_qubit(regs::ANC2, 0)?, uniform_theta(d) - theta_error);
    prog.extend(&inner).append_round(
        &inner,
        &uniform_good(),
        &[regs::INDEX, regs::ANC1, regs::ANC2],
    );
    Ok(UniformSteps {
        head: inner,
        full: prog,
        rounds: 1,
    })
}

fn uniform_layout(d: usize) -> Result<RegisterLayout> {
    let mut layout = RegisterLayout::new();
    layout.push(regs::INDEX, index_width(d))?;
    if needs_ancillas(d) {
        layout.push(regs::ANC1, 1)?.push(regs::ANC2, 1)?;
    }
    Ok(layout)
}

/// Uniform superposition over `d` labels of a `⌈log₂ d⌉`-bit register. The
/// returned state holds the index register only.
pub fn prepare_uniform(d: usize) -> Result<(Statevector, PrepReport)> {
    if d == 0 {
        return Err(invalid("uniform superposition needs d ≥ 1"));
    }
    let layout = uniform_layout(d)?;
    let steps = uniform_program(&layout, d, 0.0)?;
    let rounds = steps.rounds;

    let (p_raw, p_final, state) = if needs_ancillas(d) {
        let good = uniform_good();
        let raw = steps.head.prepare(&layout)?;
        let p_raw = success_probability(&raw, &good)?;
        let full = steps.full.prepare(&layout)?;
        let p_final = success_probability(&full, &good)?;
        let (projected, _) = full.project_and_renormalize(good.conditions())?;
        (p_raw, p_final, projected)
    } else {
        (1.0, 1.0, steps.full.prepare(&layout)?)
    };

    let reduced = state.reduced_state(regs::INDEX)?;
    let index_layout = RegisterLayout::from_widths([(regs::INDEX, index_width(d))])?;
    let amplitudes: Vec<f64> = reduced[..d].iter().map(|a| a.re).collect();
    let leak: f64 = reduced[d..].iter().map(|a| a.norm_sqr()).sum();
    if leak > 1e-18 {
        return Err(PrepError::Precondition(format!(
            "uniform state leaks {leak:.3e} onto labels ≥ {d}"
        )));
    }
    let ideal = (d as f64).sqrt().recip();
    let overlap: f64 = amplitudes.iter().map(|a| a * ideal).sum();
    let max_err = amplitudes
        .iter()
        .map(|a| (a - ideal).abs())
        .fold(0.0, f64::max);
    let report = PrepReport {
        post_selected_amplitudes: amplitudes,
        success_probability_raw: p_raw,
        aa_rounds_used: rounds,
        success_probability_final: p_final,
        multiplication_count: 0,
        fidelity_vs_target: Some(overlap * overlap),
        max_componentwise_error: Some(max_err),
    };
    let out = Statevector::from_amplitudes(
        index_layout,
        reduced.into_iter().collect::<Vec<Complex64>>(),
    )?;
    Ok((out, report))
}

/// Closed-form guarantees for a rotation angle off by `eps0`: the good
/// amplitude after one round is at least `1 − 2³·eps0²` and its probability
/// at least `1 − 2⁴·eps0²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformErrorBound {
    pub amplitude_error: f64,
    pub probability_lower: f64,
}

pub fn uniform_error_bound(eps0: f64) -> UniformErrorBound {
    UniformErrorBound {
        amplitude_error: 8.0 * eps0 * eps0,
        probability_lower: 1.0 - 16.0 * eps0 * eps0,
    }
}

/// Runs the uniform preparation with `θ − eps0` in place of `θ` and returns
/// `(final good probability, 1 − 16·eps0²)`. Fails if the probability falls
/// below the bound.
pub fn uniform_theta_perturbation(d: usize, eps0: f64) -> Result<(f64, f64)> {
    if !needs_ancillas(d) {
        return Err(invalid(format!(
            "d = {d} is a power of two; there is no rotation to perturb"
        )));
    }
    if !(0.0..0.2).contains(&eps0) {
        return Err(invalid(format!("eps0 = {eps0} outside [0, 0.2)")));
    }
    let layout = uniform_layout(d)?;
    let state = uniform_program(&layout, d, eps0)?.full.prepare(&layout)?;
    let p = success_probability(&state, &uniform_good())?;
    let bound = uniform_error_bound(eps0).probability_lower;
    if p < bound {
        return Err(PrepError::BoundViolated(format!(
            "d = {d}, eps0 = {eps0}: final probability {p} below {bound}"
        )));
    }
    Ok((p, bound))
}
