//! Amplitude amplification over a good subspace marked by register labels.
//!
//! A [`PreparationProgram`] is the unitary `A` that builds the pre-measurement
//! state from |0…0⟩. One round applies `Q = −A S₀ A⁻¹ S_good`, where both
//! reflections are diagonal sign flips.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::arithmetic::Guard;
use crate::error::{invalid, precondition, Result};
use crate::layout::RegisterLayout;
use crate::permutation::BasisPermutation;
use crate::statevector::{Statevector, REDUCTION_TOL};

/// Conjunction of `register = label` conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodSubspace {
    conditions: Vec<(String, u64)>,
}

impl GoodSubspace {
    pub fn new<S: Into<String>>(conditions: impl IntoIterator<Item = (S, u64)>) -> Result<Self> {
        let conditions: Vec<(String, u64)> =
            conditions.into_iter().map(|(n, v)| (n.into(), v)).collect();
        if conditions.is_empty() {
            return Err(invalid("good subspace needs at least one condition"));
        }
        Ok(Self { conditions })
    }

    pub fn conditions(&self) -> &[(String, u64)] {
        &self.conditions
    }

    pub fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        layout.selector(&self.conditions).map(|_| ())
    }
}

/// One invertible step of a preparation program.
#[derive(Debug, Clone)]
pub enum Step {
    Hadamard {
        register: String,
        low_bits: usize,
    },
    Ry {
        qubit: usize,
        theta: f64,
    },
    Permute {
        perm: Arc<BasisPermutation>,
        /// checked on forward runs only
        guards: Vec<Guard>,
        /// multiplier invocations this step stands for
        multiplications: usize,
    },
    PhaseFlip {
        conditions: Vec<(String, u64)>,
    },
    Negate,
}

impl Step {
    pub fn inverse(&self) -> Step {
        match self {
            Step::Hadamard { .. } | Step::PhaseFlip { .. } | Step::Negate => self.clone(),
            Step::Ry { qubit, theta } => Step::Ry {
                qubit: *qubit,
                theta: -theta,
            },
            Step::Permute {
                perm,
                multiplications,
                ..
            } => Step::Permute {
                perm: Arc::new(perm.inverse()),
                guards: Vec::new(),
                multiplications: *multiplications,
            },
        }
    }

    fn apply(&self, state: &mut Statevector, checked: bool) -> Result<()> {
        match self {
            Step::Hadamard { register, low_bits } => state.apply_hadamard_layer(register, *low_bits),
            Step::Ry { qubit, theta } => state.apply_ry(*qubit, *theta),
            Step::Permute { perm, guards, .. } => {
                if checked {
                    for g in guards {
                        g.verify(state.layout(), state.support())?;
                    }
                }
                state.apply_permutation(perm)
            }
            Step::PhaseFlip { conditions } => state.apply_phase_flip(conditions),
            Step::Negate => {
                state.negate();
                Ok(())
            }
        }
    }
}

/// Ordered list of steps building a state from |0…0⟩.
#[derive(Debug, Clone, Default)]
pub struct PreparationProgram {
    steps: Vec<Step>,
}

impl PreparationProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn steps_mut(&mut self) -> &mut Vec<Step> {
        &mut self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: Step) -> &mut Self {
        self.steps.push(step);
        self
    }

    pub fn hadamard(&mut self, register: &str, low_bits: usize) -> &mut Self {
        self.push(Step::Hadamard {
            register: register.into(),
            low_bits,
        })
    }

    pub fn ry(&mut self, qubit: usize, theta: f64) -> &mut Self {
        self.push(Step::Ry { qubit, theta })
    }

    pub fn permute(&mut self, perm: BasisPermutation, guards: Vec<Guard>) -> &mut Self {
        self.push(Step::Permute {
            perm: Arc::new(perm),
            guards,
            multiplications: 0,
        })
    }

    /// A permutation step that counts as one multiplier invocation.
    pub fn multiply(&mut self, perm: BasisPermutation, guards: Vec<Guard>) -> &mut Self {
        self.push(Step::Permute {
            perm: Arc::new(perm),
            guards,
            multiplications: 1,
        })
    }

    pub fn extend(&mut self, other: &PreparationProgram) -> &mut Self {
        self.steps.extend(other.steps.iter().cloned());
        self
    }

    pub fn inverse(&self) -> PreparationProgram {
        PreparationProgram {
            steps: self.steps.iter().rev().map(Step::inverse).collect(),
        }
    }

    /// Multiplier invocations in one application of the program.
    pub fn multiplication_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Permute {
                    multiplications, ..
                } => *multiplications,
                _ => 0,
            })
            .sum()
    }

    /// Forward run; verifies each step's guards before applying it.
    pub fn run(&self, state: &mut Statevector) -> Result<()> {
        self.steps.iter().try_for_each(|s| s.apply(state, true))
    }

    pub fn apply_unchecked(&self, state: &mut Statevector) -> Result<()> {
        self.steps.iter().try_for_each(|s| s.apply(state, false))
    }

    /// The program applied to |0…0⟩ of `layout`.
    pub fn prepare(&self, layout: &RegisterLayout) -> Result<Statevector> {
        let mut state = Statevector::zero(layout.clone());
        self.run(&mut state)?;
        Ok(state)
    }

    /// Appends one amplification round for the sub-program `inner` (which
    /// must be the whole of `self` so far, or act on registers that are
    /// still |0⟩). `zero` names the registers `inner` touches; the
    /// reflection about |0⟩ is restricted to them.
    pub fn append_round(&mut self, inner: &PreparationProgram, good: &GoodSubspace, zero: &[&str]) -> &mut Self {
        self.push(Step::PhaseFlip {
            conditions: good.conditions.clone(),
        });
        self.extend(&inner.inverse());
        self.push(Step::PhaseFlip {
            conditions: zero.iter().map(|r| (r.to_string(), 0)).collect(),
        });
        self.extend(inner);
        self.push(Step::Negate)
    }
}

/// Exact probability mass of the good subspace.
pub fn success_probability(state: &Statevector, good: &GoodSubspace) -> Result<f64> {
    state.probability(&good.conditions)
}

/// Number of rounds maximizing `sin²((2k+1)·asin√p)`:
/// `max(0, round(π / (4·asin√p) − 1/2))`.
pub fn optimal_rounds(p: f64) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0 + 1e-12) {
        return Err(invalid(format!("success probability {p} outside (0, 1]")));
    }
    let theta = p.min(1.0).sqrt().asin();
    let k = (PI / (4.0 * theta) - 0.5).round();
    Ok(k.max(0.0) as usize)
}

/// `sin²((2k+1)·asin√p₀)`.
pub fn amplified_probability(p0: f64, rounds: usize) -> f64 {
    let theta = p0.clamp(0.0, 1.0).sqrt().asin();
    ((2 * rounds + 1) as f64 * theta).sin().powi(2)
}

/// Applies `rounds` iterations of `Q = −A S₀ A⁻¹ S_good` to `state`, which
/// must equal `program` applied to |0…0⟩.
pub fn amplify(
    state: &Statevector,
    program: &PreparationProgram,
    good: &GoodSubspace,
    rounds: usize,
) -> Result<Statevector> {
    good.validate(state.layout())?;
    let mut reference = Statevector::zero(state.layout().clone());
    program.apply_unchecked(&mut reference)?;
    let mismatch = reference.distance(state)?;
    if mismatch > REDUCTION_TOL {
        return Err(precondition(format!(
            "state does not match the preparation program (distance {mismatch:.3e})"
        )));
    }
    let mut out = state.clone();
    apply_rounds(&mut out, program, good, rounds)?;
    Ok(out)
}

/// `rounds` applications of `Q` without checking where the state came from.
pub fn apply_rounds(
    state: &mut Statevector,
    program: &PreparationProgram,
    good: &GoodSubspace,
    rounds: usize,
) -> Result<()> {
    if rounds == 0 {
        return Ok(());
    }
    let inverse = program.inverse();
    let good_sel = state.layout().selector(good.conditions())?;
    for _ in 0..rounds {
        state.flip_where(good_sel);
        inverse.apply_unchecked(state)?;
        // S₀ followed by the global −1: everything but |0…0⟩ changes sign
        let a0 = state.amplitudes()[0];
        state.negate();
        state.set_amplitude(0, a0);
        program.apply_unchecked(state)?;
    }
    Ok(())
}
